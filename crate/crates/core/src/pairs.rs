//! Upper-triangle indexing for pair-valued data `(w_{i,j})_{i<j}`.
//!
//! Pairs are ordered lexicographically: `(0,1), (0,2), …, (0,n-1), (1,2), …`.
//! For three questions this is `(01, 02, 12)`.

/// Number of unordered pairs among `n` questions.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All pairs `i < j` in canonical order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

/// Position of the pair `{i, j}` (in either order) in the canonical list.
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    assert!(
        i != j && i < n && j < n,
        "pair ({i},{j}) out of range for n={n}"
    );
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Two-digit label `"ij"` used as a key in query files.
pub fn pair_label(i: usize, j: usize) -> String {
    format!("{i}{j}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_matches_enumeration() {
        for n in 0..7 {
            let ps = pairs(n);
            assert_eq!(ps.len(), pair_count(n));
            for (k, &(i, j)) in ps.iter().enumerate() {
                assert_eq!(pair_index(i, j, n), k);
                assert_eq!(pair_index(j, i, n), k);
            }
        }
    }

    #[test]
    fn three_questions() {
        assert_eq!(pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
    }
}
