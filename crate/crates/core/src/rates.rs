//! Ratio helpers shared by the summary and metrics writers.

use std::cmp::Ordering;

use serde::Serializer;

/// `num / den`, absent when the denominator is zero.
pub fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

pub(crate) fn serialize_rate<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_f64(round4(*v)),
        None => s.serialize_none(),
    }
}

/// Whole percent for human-readable tables.
pub fn percent(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{:.0}%", v * 100.0))
}

/// Orders ids like `proj-2` before `proj-10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a, b);
    loop {
        match (x.is_empty(), y.is_empty()) {
            (true, true) => return a.cmp(b),
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let xd = x.starts_with(|c: char| c.is_ascii_digit());
        let yd = y.starts_with(|c: char| c.is_ascii_digit());
        let split = |s: &str, digits: bool| {
            s.find(|c: char| c.is_ascii_digit() != digits).unwrap_or(s.len())
        };
        let (xs, xr) = x.split_at(split(x, xd));
        let (ys, yr) = y.split_at(split(y, yd));
        let ord = if xd && yd {
            let xt = xs.trim_start_matches('0');
            let yt = ys.trim_start_matches('0');
            xt.len().cmp(&yt.len()).then_with(|| xt.cmp(yt))
        } else {
            xs.cmp(ys)
        };
        if ord != Ordering::Equal {
            return ord;
        }
        x = xr;
        y = yr;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(ratio(1, 0), None);
        assert_eq!(ratio(3, 10), Some(0.3));
        assert_eq!(round4(14.0 / 124.0), 0.1129);
        assert_eq!(percent(Some(0.9354)), "94%");
        assert_eq!(percent(None), "-");
    }

    #[test]
    fn natural_order() {
        let mut ids = vec!["p-10", "p-2", "p-1", "q-1", "p-02b"];
        ids.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(ids, ["p-1", "p-2", "p-02b", "p-10", "q-1"]);
    }
}
