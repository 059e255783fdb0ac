//! Pure functions callable from expressions.

use std::collections::BTreeSet;

use super::ErrorKind;

/// Lowest index of a minimal element among indices not in `excluded`.
pub fn find_min(a: &[i64], excluded: &BTreeSet<i64>) -> Result<i64, ErrorKind> {
    let mut best: Option<(i64, usize)> = None;
    for (j, &x) in a.iter().enumerate() {
        if excluded.contains(&(j as i64)) {
            continue;
        }
        if best.is_none_or(|(b, _)| x < b) {
            best = Some((x, j));
        }
    }
    best.map(|(_, j)| j as i64).ok_or(ErrorKind::EmptySelect)
}

/// Index of the element of rank `r` (0-based) in `a`, where equal elements
/// are ranked by index.
pub fn find_rank(a: &[i64], r: i64) -> Result<i64, ErrorKind> {
    if r < 0 || r as usize >= a.len() {
        return Err(ErrorKind::IndexOutOfBounds);
    }
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by_key(|&j| (a[j], j));
    Ok(idx[r as usize] as i64)
}

pub fn below(s: &BTreeSet<i64>, x: i64) -> BTreeSet<i64> {
    s.range(..x).copied().collect()
}

pub fn above(s: &BTreeSet<i64>, x: i64) -> BTreeSet<i64> {
    s.iter().copied().filter(|&y| y > x).collect()
}
