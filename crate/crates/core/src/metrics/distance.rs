//! Textual contribution-size primitives: word tokenization, token-level
//! edit distance, and LCS-based line diff counts.

/// Split text into maximal runs of non-whitespace characters
/// (Unicode whitespace), order preserved.
pub fn tokenize_words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

fn common_prefix_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

fn common_suffix_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count()
}

/// Minimal number of single-token insertions, deletions and substitutions
/// transforming `a` into `b`.
///
/// Two-row dynamic program, O(min(n,m)) space; identical ends are trimmed
/// first, which leaves the result unchanged.
pub fn levenshtein_words<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let prefix = common_prefix_len(a, b);
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = common_suffix_len(a, b);
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);

    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }

    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (j, lt) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = j + 1;
        for (i, st) in short.iter().enumerate() {
            let up = row[i + 1];
            row[i + 1] = if st == lt {
                diag
            } else {
                1 + diag.min(up).min(row[i])
            };
            diag = up;
        }
    }
    row[short.len()]
}

/// Length of a longest common subsequence, two-row dynamic program.
fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    let mut row = vec![0usize; short.len() + 1];
    for lt in long {
        let mut diag = 0;
        for (i, st) in short.iter().enumerate() {
            let up = row[i + 1];
            row[i + 1] = if st == lt { diag + 1 } else { up.max(row[i]) };
            diag = up;
        }
    }
    row[short.len()]
}

/// Count lines present on only one side of an LCS alignment of the two
/// texts. A modified line counts twice: once removed, once added.
pub fn line_diff_delta(before: &str, after: &str) -> usize {
    let a: Vec<&str> = before.lines().collect();
    let b: Vec<&str> = after.lines().collect();

    let prefix = common_prefix_len(&a, &b);
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = common_suffix_len(a, b);
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);

    a.len() + b.len() - 2 * lcs_len(a, b)
}
