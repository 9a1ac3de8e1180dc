#include "clozefix/corpus.hpp"

namespace clozefix {

// Bug-free programs the synthetic corpus is derived from. Every line is in
// the tokenizer's canonical rendering so ground-truth lines compare exactly.
const std::vector<BaseProgram>& base_programs() {
  static const std::vector<BaseProgram> programs = {
      {"stats", R"(fn sum(xs) {
  let total = 0;
  for (let i = 0; i < len(xs); i += 1) {
    total += xs[i];
  }
  return total;
}

fn max_of(xs) {
  let best = xs[0];
  for (let i = 1; i < len(xs); i += 1) {
    best = max(best, xs[i]);
  }
  return best;
}

fn min_of(xs) {
  let best = xs[0];
  for (let i = 1; i < len(xs); i += 1) {
    if (xs[i] < best) {
      best = xs[i];
    }
  }
  return best;
}

fn count_above(xs, limit) {
  let count = 0;
  for (let i = 0; i < len(xs); i += 1) {
    if (xs[i] > limit) {
      count += 1;
    }
  }
  return count;
}

fn mean_floor(xs) {
  if (len(xs) == 0) {
    return 0;
  }
  return sum(xs) / len(xs);
}

test sum_values {
  check(sum([1, 2, 3, 4]) == 10);
  check(sum([]) == 0);
  check(sum([7]) == 7);
}

test extremes {
  check(max_of([3, 9, 2]) == 9);
  check(max_of([5]) == 5);
  check(min_of([3, 9, 2]) == 2);
  check(min_of([4, 4, 8]) == 4);
  check(min_of([8, 6, 1]) == 1);
}

test counting {
  check(count_above([1, 5, 7, 5], 5) == 1);
  check(count_above([], 0) == 0);
  check(count_above([9, 10], 8) == 2);
}

test means {
  check(mean_floor([1, 2, 4]) == 2);
  check(mean_floor([]) == 0);
  check(mean_floor([10, 20]) == 15);
}
)"},
      {"search", R"(fn linear_search(xs, target) {
  for (let i = 0; i < len(xs); i += 1) {
    if (xs[i] == target) {
      return i;
    }
  }
  return 0 - 1;
}

fn binary_search(xs, target) {
  let lo = 0;
  let hi = len(xs) - 1;
  while (lo <= hi) {
    let mid = (lo + hi) / 2;
    if (xs[mid] == target) {
      return mid;
    }
    if (xs[mid] < target) {
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return 0 - 1;
}

fn contains(xs, target) {
  return linear_search(xs, target) >= 0;
}

fn lower_bound(xs, target) {
  let lo = 0;
  let hi = len(xs);
  while (lo < hi) {
    let mid = (lo + hi) / 2;
    if (xs[mid] < target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

test linear {
  check(linear_search([4, 8, 15], 8) == 1);
  check(linear_search([4, 8, 15], 4) == 0);
  check(linear_search([4, 8, 15], 16) == 0 - 1);
  check(linear_search([], 1) == 0 - 1);
}

test binary {
  let xs = [1, 3, 5, 7, 9, 11];
  check(binary_search(xs, 1) == 0);
  check(binary_search(xs, 7) == 3);
  check(binary_search(xs, 11) == 5);
  check(binary_search(xs, 4) == 0 - 1);
  check(binary_search([], 4) == 0 - 1);
}

test membership {
  check(contains([2, 4], 4));
  check(contains([2, 4], 2));
  check(!contains([2, 4], 3));
}

test bounds {
  check(lower_bound([1, 3, 3, 5], 3) == 1);
  check(lower_bound([1, 3, 3, 5], 6) == 4);
  check(lower_bound([1, 3, 3, 5], 0) == 0);
  check(lower_bound([1, 3, 3, 5], 4) == 3);
}
)"},
      {"sorting", R"(fn insertion_sort(xs) {
  for (let i = 1; i < len(xs); i += 1) {
    let key = xs[i];
    let j = i - 1;
    while (j >= 0 && xs[j] > key) {
      xs[j + 1] = xs[j];
      j -= 1;
    }
    xs[j + 1] = key;
  }
  return xs;
}

fn is_sorted(xs) {
  for (let i = 1; i < len(xs); i += 1) {
    if (xs[i - 1] > xs[i]) {
      return false;
    }
  }
  return true;
}

fn count_inversions(xs) {
  let count = 0;
  for (let i = 0; i < len(xs); i += 1) {
    for (let j = i + 1; j < len(xs); j += 1) {
      if (xs[i] > xs[j]) {
        count += 1;
      }
    }
  }
  return count;
}

fn selection_min_index(xs, start) {
  let best = start;
  for (let i = start + 1; i < len(xs); i += 1) {
    if (xs[i] < xs[best]) {
      best = i;
    }
  }
  return best;
}

test sorts {
  check(insertion_sort([3, 1, 2]) == [1, 2, 3]);
  check(insertion_sort([5, 4, 3, 2, 1]) == [1, 2, 3, 4, 5]);
  check(insertion_sort([]) == []);
  check(insertion_sort([2, 2, 1]) == [1, 2, 2]);
}

test sortedness {
  check(is_sorted([1, 2, 2, 5]));
  check(!is_sorted([2, 1]));
  check(is_sorted([]));
  check(!is_sorted([1, 3, 2]));
}

test inversions {
  check(count_inversions([3, 1, 2]) == 2);
  check(count_inversions([1, 2, 3]) == 0);
  check(count_inversions([2, 2]) == 0);
}

test selection {
  check(selection_min_index([4, 2, 7, 1], 0) == 3);
  check(selection_min_index([4, 2, 7, 1, 9], 1) == 3);
  check(selection_min_index([4, 2, 7], 2) == 2);
  check(selection_min_index([5, 3, 3], 0) == 1);
}
)"},
      {"number_theory", R"(fn gcd(a, b) {
  while (b != 0) {
    let t = a % b;
    a = b;
    b = t;
  }
  return a;
}

fn lcm(a, b) {
  return a / gcd(a, b) * b;
}

fn is_prime(n) {
  if (n < 2) {
    return false;
  }
  for (let d = 2; d * d <= n; d += 1) {
    if (n % d == 0) {
      return false;
    }
  }
  return true;
}

fn power(base, exp) {
  let result = 1;
  for (let i = 0; i < exp; i += 1) {
    result *= base;
  }
  return result;
}

fn factorial(n) {
  let result = 1;
  for (let k = 2; k <= n; k += 1) {
    result *= k;
  }
  return result;
}

test gcd_lcm {
  check(gcd(12, 18) == 6);
  check(gcd(7, 3) == 1);
  check(gcd(5, 0) == 5);
  check(lcm(4, 6) == 12);
  check(lcm(3, 5) == 15);
}

test primes {
  check(!is_prime(1));
  check(is_prime(2));
  check(is_prime(13));
  check(!is_prime(15));
  check(!is_prime(49));
  check(is_prime(97));
}

test powers {
  check(power(2, 10) == 1024);
  check(power(3, 0) == 1);
  check(power(5, 1) == 5);
}

test factorials {
  check(factorial(0) == 1);
  check(factorial(5) == 120);
  check(factorial(1) == 1);
}
)"},
      {"digits", R"(fn digit_sum(n) {
  let total = 0;
  while (n > 0) {
    total += n % 10;
    n = n / 10;
  }
  return total;
}

fn reverse_number(n) {
  let result = 0;
  while (n > 0) {
    result = result * 10 + n % 10;
    n = n / 10;
  }
  return result;
}

fn count_digits(n) {
  if (n == 0) {
    return 1;
  }
  let count = 0;
  while (n > 0) {
    count += 1;
    n = n / 10;
  }
  return count;
}

fn is_palindrome(n) {
  return n == reverse_number(n);
}

test sums {
  check(digit_sum(1234) == 10);
  check(digit_sum(0) == 0);
  check(digit_sum(909) == 18);
}

test reversal {
  check(reverse_number(123) == 321);
  check(reverse_number(100) == 1);
  check(reverse_number(7) == 7);
}

test digit_counts {
  check(count_digits(0) == 1);
  check(count_digits(9) == 1);
  check(count_digits(10) == 2);
  check(count_digits(12345) == 5);
}

test palindromes {
  check(is_palindrome(121));
  check(!is_palindrome(123));
  check(is_palindrome(5));
}
)"},
      {"intervals", R"(fn clamp(x, lo, hi) {
  if (x < lo) {
    return lo;
  }
  if (x > hi) {
    return hi;
  }
  return x;
}

fn in_range(x, lo, hi) {
  return x >= lo && x <= hi;
}

fn overlaps(a_lo, a_hi, b_lo, b_hi) {
  return a_lo <= b_hi && b_lo <= a_hi;
}

fn overlap_length(a_lo, a_hi, b_lo, b_hi) {
  let lo = max(a_lo, b_lo);
  let hi = min(a_hi, b_hi);
  if (hi < lo) {
    return 0;
  }
  return hi - lo + 1;
}

test clamping {
  check(clamp(5, 0, 10) == 5);
  check(clamp(0 - 3, 0, 10) == 0);
  check(clamp(12, 0, 10) == 10);
  check(clamp(10, 0, 10) == 10);
}

test ranges {
  check(in_range(3, 1, 5));
  check(in_range(1, 1, 5));
  check(in_range(5, 1, 5));
  check(!in_range(6, 1, 5));
  check(!in_range(0, 1, 5));
}

test overlap {
  check(overlaps(1, 5, 4, 8));
  check(overlaps(1, 5, 5, 8));
  check(!overlaps(1, 3, 4, 8));
  check(!overlaps(6, 9, 1, 5));
  check(overlap_length(1, 5, 4, 8) == 2);
  check(overlap_length(1, 3, 4, 8) == 0);
  check(overlap_length(2, 9, 3, 4) == 2);
}
)"},
      {"sequences", R"(fn fib(n) {
  let a = 0;
  let b = 1;
  for (let i = 0; i < n; i += 1) {
    let next = a + b;
    a = b;
    b = next;
  }
  return a;
}

fn climb_ways(n) {
  let ways = array(n + 1, 0);
  ways[0] = 1;
  for (let i = 1; i <= n; i += 1) {
    ways[i] = ways[i - 1];
    if (i >= 2) {
      ways[i] += ways[i - 2];
    }
  }
  return ways[n];
}

fn max_subarray(xs) {
  let best = xs[0];
  let current = xs[0];
  for (let i = 1; i < len(xs); i += 1) {
    current = max(xs[i], current + xs[i]);
    best = max(best, current);
  }
  return best;
}

fn tribonacci(n) {
  if (n < 2) {
    return 0;
  }
  let a = 0;
  let b = 0;
  let c = 1;
  for (let i = 2; i < n; i += 1) {
    let next = a + b + c;
    a = b;
    b = c;
    c = next;
  }
  return c;
}

test fibonacci {
  check(fib(0) == 0);
  check(fib(1) == 1);
  check(fib(2) == 1);
  check(fib(10) == 55);
}

test stairs {
  check(climb_ways(1) == 1);
  check(climb_ways(2) == 2);
  check(climb_ways(5) == 8);
  check(climb_ways(0) == 1);
}

test kadane {
  check(max_subarray([1, 0 - 3, 4, 0 - 1, 2]) == 5);
  check(max_subarray([0 - 2, 0 - 1]) == 0 - 1);
  check(max_subarray([3]) == 3);
}

test tribonacci_values {
  check(tribonacci(0) == 0);
  check(tribonacci(2) == 1);
  check(tribonacci(4) == 2);
  check(tribonacci(6) == 7);
}
)"},
      {"grid", R"(fn grid_sum(grid) {
  let total = 0;
  for (let r = 0; r < len(grid); r += 1) {
    for (let c = 0; c < len(grid[r]); c += 1) {
      total += grid[r][c];
    }
  }
  return total;
}

fn diagonal_sum(grid) {
  let total = 0;
  for (let i = 0; i < len(grid); i += 1) {
    total += grid[i][i];
  }
  return total;
}

fn row_max(grid, r) {
  let best = grid[r][0];
  for (let c = 1; c < len(grid[r]); c += 1) {
    best = max(best, grid[r][c]);
  }
  return best;
}

fn count_neighbors(grid, r, c) {
  let count = 0;
  if (r > 0 && grid[r - 1][c] == 1) {
    count += 1;
  }
  if (r + 1 < len(grid) && grid[r + 1][c] == 1) {
    count += 1;
  }
  if (c > 0 && grid[r][c - 1] == 1) {
    count += 1;
  }
  if (c + 1 < len(grid[r]) && grid[r][c + 1] == 1) {
    count += 1;
  }
  return count;
}

test sums {
  check(grid_sum([[1, 2], [3, 4]]) == 10);
  check(grid_sum([]) == 0);
  check(diagonal_sum([[1, 2], [3, 4]]) == 5);
  check(diagonal_sum([[5, 0, 0], [0, 6, 0], [0, 0, 7]]) == 18);
}

test row_maximum {
  check(row_max([[1, 9, 3], [4, 2, 8]], 0) == 9);
  check(row_max([[1, 9, 3], [4, 2, 8]], 1) == 8);
  check(row_max([[7]], 0) == 7);
}

test neighbors {
  let g = [[0, 1, 0], [1, 1, 1], [0, 1, 0]];
  check(count_neighbors(g, 1, 1) == 4);
  check(count_neighbors(g, 0, 0) == 2);
  check(count_neighbors(g, 0, 1) == 1);
  check(count_neighbors(g, 2, 2) == 2);
  check(count_neighbors(g, 1, 0) == 1);
}
)"},
      {"transforms", R"(fn reversed(xs) {
  let out = [];
  for (let i = len(xs) - 1; i >= 0; i -= 1) {
    push(out, xs[i]);
  }
  return out;
}

fn rotate_left(xs, k) {
  let n = len(xs);
  let out = [];
  for (let i = 0; i < n; i += 1) {
    push(out, xs[(i + k) % n]);
  }
  return out;
}

fn prefix_sums(xs) {
  let out = array(len(xs) + 1, 0);
  for (let i = 0; i < len(xs); i += 1) {
    out[i + 1] = out[i] + xs[i];
  }
  return out;
}

fn dedup_sorted(xs) {
  let out = [];
  for (let i = 0; i < len(xs); i += 1) {
    if (i == 0 || xs[i] != xs[i - 1]) {
      push(out, xs[i]);
    }
  }
  return out;
}

test reversing {
  check(reversed([1, 2, 3]) == [3, 2, 1]);
  check(reversed([]) == []);
  check(reversed([4]) == [4]);
}

test rotation {
  check(rotate_left([1, 2, 3, 4], 1) == [2, 3, 4, 1]);
  check(rotate_left([1, 2, 3], 0) == [1, 2, 3]);
  check(rotate_left([1, 2, 3], 5) == [3, 1, 2]);
}

test prefixes {
  check(prefix_sums([1, 2, 3]) == [0, 1, 3, 6]);
  check(prefix_sums([]) == [0]);
}

test dedup {
  check(dedup_sorted([1, 1, 2, 3, 3, 3]) == [1, 2, 3]);
  check(dedup_sorted([]) == []);
  check(dedup_sorted([5, 5]) == [5]);
}
)"},
      {"counting", R"(fn count_of(xs, target) {
  let count = 0;
  for (let i = 0; i < len(xs); i += 1) {
    if (xs[i] == target) {
      count += 1;
    }
  }
  return count;
}

fn majority(xs) {
  for (let i = 0; i < len(xs); i += 1) {
    if (count_of(xs, xs[i]) * 2 > len(xs)) {
      return xs[i];
    }
  }
  return 0 - 1;
}

fn histogram(xs, buckets) {
  let counts = array(buckets, 0);
  for (let i = 0; i < len(xs); i += 1) {
    if (xs[i] >= 0 && xs[i] < buckets) {
      counts[xs[i]] += 1;
    }
  }
  return counts;
}

fn unique_count(xs) {
  let count = 0;
  for (let i = 0; i < len(xs); i += 1) {
    if (count_of(xs, xs[i]) == 1) {
      count += 1;
    }
  }
  return count;
}

test counts {
  check(count_of([1, 2, 1, 1], 1) == 3);
  check(count_of([], 1) == 0);
  check(count_of([2, 3], 4) == 0);
}

test majorities {
  check(majority([2, 2, 1]) == 2);
  check(majority([1, 2]) == 0 - 1);
  check(majority([3, 1, 3, 3]) == 3);
  check(majority([1, 2, 1, 2]) == 0 - 1);
}

test histograms {
  check(histogram([0, 1, 1, 3], 4) == [1, 2, 0, 1]);
  check(histogram([5, 0 - 1, 2], 3) == [0, 0, 1]);
}

test uniques {
  check(unique_count([1, 2, 2, 3]) == 2);
  check(unique_count([]) == 0);
  check(unique_count([4, 4]) == 0);
}
)"},
      {"two_pointers", R"(fn has_pair_sum(xs, target) {
  let lo = 0;
  let hi = len(xs) - 1;
  while (lo < hi) {
    let s = xs[lo] + xs[hi];
    if (s == target) {
      return true;
    }
    if (s < target) {
      lo += 1;
    } else {
      hi -= 1;
    }
  }
  return false;
}

fn merge_sorted(a, b) {
  let out = [];
  let i = 0;
  let j = 0;
  while (i < len(a) && j < len(b)) {
    if (a[i] <= b[j]) {
      push(out, a[i]);
      i += 1;
    } else {
      push(out, b[j]);
      j += 1;
    }
  }
  while (i < len(a)) {
    push(out, a[i]);
    i += 1;
  }
  while (j < len(b)) {
    push(out, b[j]);
    j += 1;
  }
  return out;
}

fn common_count(a, b) {
  let i = 0;
  let j = 0;
  let count = 0;
  while (i < len(a) && j < len(b)) {
    if (a[i] == b[j]) {
      count += 1;
      i += 1;
      j += 1;
    } else if (a[i] < b[j]) {
      i += 1;
    } else {
      j += 1;
    }
  }
  return count;
}

test pairs {
  check(has_pair_sum([1, 2, 4, 7], 9));
  check(has_pair_sum([1, 2, 4, 7], 3));
  check(!has_pair_sum([1, 2, 4, 7], 10));
  check(!has_pair_sum([5], 10));
  check(has_pair_sum([1, 2, 4, 7], 8));
}

test merging {
  check(merge_sorted([1, 4, 6], [2, 3, 7]) == [1, 2, 3, 4, 6, 7]);
  check(merge_sorted([], [1, 2]) == [1, 2]);
  check(merge_sorted([3], []) == [3]);
  check(merge_sorted([1, 2], [1, 2]) == [1, 1, 2, 2]);
}

test common {
  check(common_count([1, 2, 3, 5], [2, 3, 4, 5]) == 3);
  check(common_count([], [1]) == 0);
  check(common_count([1, 1], [1]) == 1);
}
)"},
      {"ledger", R"(fn apply_withdrawal(balance, amount) {
  if (amount > 0 && amount <= balance) {
    return balance - amount;
  }
  return balance;
}

fn apply_deposit(balance, amount) {
  if (amount > 0) {
    return balance + amount;
  }
  return balance;
}

fn run_ledger(start, ops) {
  let balance = start;
  for (let i = 0; i < len(ops); i += 1) {
    let op = ops[i];
    if (op[0] == 1) {
      balance = apply_deposit(balance, op[1]);
    } else if (op[0] == 2) {
      balance = apply_withdrawal(balance, op[1]);
    }
  }
  return balance;
}

fn interest(balance, rate_percent, years) {
  let result = balance;
  for (let y = 0; y < years; y += 1) {
    result += result * rate_percent / 100;
  }
  return result;
}

test withdrawals {
  check(apply_withdrawal(100, 30) == 70);
  check(apply_withdrawal(100, 100) == 0);
  check(apply_withdrawal(100, 101) == 100);
  check(apply_withdrawal(100, 0 - 5) == 100);
  check(apply_withdrawal(100, 0) == 100);
}

test deposits {
  check(apply_deposit(10, 5) == 15);
  check(apply_deposit(10, 0 - 5) == 10);
}

test ledger_runs {
  check(run_ledger(50, [[1, 25], [2, 80], [2, 70], [3, 9]]) == 5);
  check(run_ledger(0, []) == 0);
}

test compound {
  check(interest(1000, 10, 2) == 1210);
  check(interest(500, 0, 3) == 500);
  check(interest(100, 50, 1) == 150);
}
)"},
      {"calendar", R"(fn is_leap(year) {
  return year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
}

fn days_in_month(month, year) {
  if (month == 2) {
    if (is_leap(year)) {
      return 29;
    }
    return 28;
  }
  if (month == 4 || month == 6 || month == 9 || month == 11) {
    return 30;
  }
  return 31;
}

fn is_triangle(a, b, c) {
  return a + b > c && a + c > b && b + c > a;
}

fn day_of_year(day, month, year) {
  let total = day;
  for (let m = 1; m < month; m += 1) {
    total += days_in_month(m, year);
  }
  return total;
}

test leap_years {
  check(is_leap(2024));
  check(!is_leap(2023));
  check(!is_leap(1900));
  check(is_leap(2000));
}

test months {
  check(days_in_month(2, 2024) == 29);
  check(days_in_month(2, 2023) == 28);
  check(days_in_month(4, 2023) == 30);
  check(days_in_month(11, 2023) == 30);
  check(days_in_month(1, 2023) == 31);
  check(days_in_month(9, 2023) == 30);
  check(days_in_month(6, 2023) == 30);
  check(days_in_month(12, 2023) == 31);
}

test triangles {
  check(is_triangle(3, 4, 5));
  check(!is_triangle(1, 2, 3));
  check(!is_triangle(1, 10, 2));
  check(!is_triangle(10, 1, 2));
  check(!is_triangle(2, 1, 10));
}

test ordinal_days {
  check(day_of_year(1, 1, 2023) == 1);
  check(day_of_year(1, 3, 2024) == 61);
  check(day_of_year(31, 12, 2023) == 365);
}
)"},
  };
  return programs;
}

}  // namespace clozefix
