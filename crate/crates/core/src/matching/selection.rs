use super::MatchingError;

/// The `k`-th largest element of `values`, counting duplicates.
///
/// # Example
/// ```
/// use fogmatch::matching::selection;
/// assert_eq!(selection(&[5.0, 5.0, 2.0], 2).unwrap(), 5.0);
/// ```
pub fn selection(values: &[f64], k: usize) -> Result<f64, MatchingError> {
    if k == 0 || k > values.len() {
        return Err(MatchingError::RankOutOfRange { rank: k, len: values.len() });
    }
    let mut v = values.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}
