//! Failure probabilities for "k failures in total" versus "k dense failures".
//!
//! Local failures arrive as a Poisson process with rate `1/mtbf`. A system
//! that tolerates `k` failures in total fails once the `(k+1)`-th arrives
//! during the mission. A system that tolerates `k` dense failures only fails
//! when `k+1` failures come in a block, each within one repair window of the
//! previous one; windows are treated as independent.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct MissionProfile {
    pub mission_hours: f64,
    pub mtbf_hours: f64,
    pub repair_seconds: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("{0} must be positive and finite")]
    NotPositive(&'static str),
    #[error("repair time must be non-negative and finite")]
    BadRepair,
}

impl MissionProfile {
    pub fn new(mission_hours: f64, mtbf_hours: f64, repair_seconds: f64) -> Result<Self, ProfileError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(mission_hours) {
            return Err(ProfileError::NotPositive("mission time"));
        }
        if !positive(mtbf_hours) {
            return Err(ProfileError::NotPositive("MTBF"));
        }
        if !(repair_seconds.is_finite() && repair_seconds >= 0.0) {
            return Err(ProfileError::BadRepair);
        }
        Ok(Self {
            mission_hours,
            mtbf_hours,
            repair_seconds,
        })
    }

    /// 20 hours of operation, MTBF 10 hours, 36 second repairs.
    pub fn reference() -> Self {
        Self {
            mission_hours: 20.0,
            mtbf_hours: 10.0,
            repair_seconds: 36.0,
        }
    }

    /// Warns when repairs are not much shorter than the MTBF, where the
    /// independent-window approximation breaks down.
    pub fn warnings(&self) -> Vec<String> {
        let ratio = self.repair_seconds / 3600.0 / self.mtbf_hours;
        if ratio > 0.01 {
            vec![format!(
                "repair time is {:.1}% of the MTBF; dense-failure estimates assume it is much smaller",
                ratio * 100.0
            )]
        } else {
            Vec::new()
        }
    }

    /// Probability that the next failure falls inside a repair window.
    pub fn window_probability(&self) -> f64 {
        -(-(self.repair_seconds / 3600.0) / self.mtbf_hours).exp_m1()
    }
}

/// `P(X ≥ k+1)` for `X ~ Poisson(T/mtbf)`; `k = -1` gives 1.
pub fn p_fail_total(profile: &MissionProfile, k: i64) -> f64 {
    if k < 0 {
        return 1.0;
    }
    poisson_tail(profile.mission_hours / profile.mtbf_hours, k as u64 + 1)
}

/// `P(X ≥ n)` for `X ~ Poisson(lambda)`.
fn poisson_tail(lambda: f64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if (n as f64) <= lambda {
        let mut term = (-lambda).exp();
        let mut cdf = term;
        for i in 1..n {
            term *= lambda / i as f64;
            cdf += term;
        }
        return (1.0 - cdf).max(0.0);
    }
    // Sum the upper tail directly to keep relative precision.
    let mut log_term = -lambda;
    for i in 1..=n {
        log_term += lambda.ln() - (i as f64).ln();
    }
    let mut term = log_term.exp();
    let mut sum = 0.0;
    let mut i = n;
    while term > sum * 1e-17 && term > 0.0 {
        sum += term;
        i += 1;
        term *= lambda / i as f64;
    }
    sum
}

/// Probability that a block of `k+1` dense failures occurs during the
/// mission: block rate `p^k / mtbf` with `p` the window probability.
pub fn p_fail_dense(profile: &MissionProfile, k: u32) -> f64 {
    assert!(k >= 1, "dense failures need k >= 1");
    let p = profile.window_probability();
    let rate = p.powi(k as i32) / profile.mtbf_hours;
    -(-profile.mission_hours * rate).exp_m1()
}

/// Percentage with two significant figures (at least one decimal);
/// very small values switch to scientific notation.
pub fn format_percent(p: f64) -> String {
    let pct = p * 100.0;
    if pct == 0.0 {
        return "0%".into();
    }
    if pct < 0.01 {
        return format!("{pct:.1e}%");
    }
    let magnitude = pct.abs().log10().floor() as i32;
    let decimals = (1 - magnitude).max(1) as usize;
    format!("{pct:.decimals$}%")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskRow {
    pub k: u32,
    pub total: f64,
    pub dense: f64,
}

pub fn risk_table(profile: &MissionProfile, ks: impl IntoIterator<Item = u32>) -> Vec<RiskRow> {
    ks.into_iter()
        .filter(|&k| k >= 1)
        .map(|k| RiskRow {
            k,
            total: p_fail_total(profile, k as i64),
            dense: p_fail_dense(profile, k),
        })
        .collect()
}

pub fn table_csv(rows: &[RiskRow]) -> String {
    let mut out = String::from("k,p_fail_k_failures,p_fail_k_dense_failures\n");
    for r in rows {
        let _ = writeln!(out, "{},{:e},{:e}", r.k, r.total, r.dense);
    }
    out
}

/// Two-row table: one column per `k`.
pub fn table_text(rows: &[RiskRow]) -> String {
    let header: Vec<String> = rows.iter().map(|r| format!("k={}", r.k)).collect();
    let total: Vec<String> = rows.iter().map(|r| format_percent(r.total)).collect();
    let dense: Vec<String> = rows.iter().map(|r| format_percent(r.dense)).collect();
    let width = header
        .iter()
        .chain(&total)
        .chain(&dense)
        .map(|s| s.chars().count())
        .max()
        .unwrap_or(0);
    let line = |name: &str, cells: &[String]| {
        let mut l = format!("{name:<18}");
        for c in cells {
            let _ = write!(l, " {c:>width$}");
        }
        l.push('\n');
        l
    };
    let mut out = line("", &header);
    out.push_str(&line("k failures", &total));
    out.push_str(&line("k dense failures", &dense));
    out
}

/// Parses `36s`, `2m`, `0.5h` or a bare number of seconds.
pub fn parse_duration_seconds(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (num, scale) = match t.chars().last() {
        Some('s') => (&t[..t.len() - 1], 1.0),
        Some('m') => (&t[..t.len() - 1], 60.0),
        Some('h') => (&t[..t.len() - 1], 3600.0),
        _ => (t, 1.0),
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("invalid duration `{text}` (expected e.g. 36s, 2m, 0.5h)"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("duration `{text}` must be non-negative"));
    }
    Ok(v * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pct(x: f64) -> f64 {
        x * 100.0
    }

    #[test]
    fn reference_total_row() {
        let p = MissionProfile::reference();
        let expect = [(1, 59.40), (2, 32.33), (3, 14.29), (4, 5.27), (5, 1.66), (6, 0.45)];
        for (k, e) in expect {
            assert!((pct(p_fail_total(&p, k)) - e).abs() < 0.01, "k={k}");
        }
        assert_eq!(p_fail_total(&p, -1), 1.0);
        assert!(p_fail_total(&p, 60) < 1e-40);
    }

    #[test]
    fn reference_dense_row() {
        let p = MissionProfile::reference();
        let w = p.window_probability();
        assert!((w - 0.0009995).abs() < 1e-6);
        for k in 1..=6u32 {
            let expect = 2.0 * 10f64.powi(-3 * k as i32);
            let got = p_fail_dense(&p, k);
            assert!((got / expect - 1.0).abs() < 0.01, "k={k}: {got}");
        }
    }

    #[test]
    fn dense_ratio_is_window_probability() {
        let p = MissionProfile::reference();
        let w = p.window_probability();
        for k in 1..6 {
            let ratio = p_fail_dense(&p, k + 1) / p_fail_dense(&p, k);
            assert!((ratio / w - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn zero_repair_time() {
        let p = MissionProfile::new(20.0, 10.0, 0.0).unwrap();
        for k in 1..=6 {
            assert_eq!(p_fail_dense(&p, k), 0.0);
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(format_percent(0.594), "59.4%");
        assert_eq!(format_percent(0.0527), "5.3%");
        assert_eq!(format_percent(0.0045), "0.45%");
        assert_eq!(format_percent(0.001998), "0.20%");
        assert_eq!(format_percent(2e-6), "2.0e-4%");
    }

    #[test]
    fn text_table_has_two_rows() {
        let rows = risk_table(&MissionProfile::reference(), 1..=6);
        let text = table_text(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("k failures") && lines[1].contains("14.3%"));
        assert!(lines[2].contains("0.20%"));
        assert!(table_csv(&rows).lines().count() == 7);
    }

    #[test]
    fn durations() {
        assert_eq!(parse_duration_seconds("36s").unwrap(), 36.0);
        assert_eq!(parse_duration_seconds("2m").unwrap(), 120.0);
        assert_eq!(parse_duration_seconds("0.5h").unwrap(), 1800.0);
        assert_eq!(parse_duration_seconds("12").unwrap(), 12.0);
        assert!(parse_duration_seconds("-1s").is_err());
        assert!(parse_duration_seconds("soon").is_err());
    }

    #[test]
    fn invalid_profiles() {
        assert!(MissionProfile::new(0.0, 10.0, 36.0).is_err());
        assert!(MissionProfile::new(20.0, f64::NAN, 36.0).is_err());
        assert!(MissionProfile::new(20.0, 10.0, -1.0).is_err());
        assert!(MissionProfile::new(20.0, 0.01, 36.0).unwrap().warnings().len() == 1);
    }
}
