//! Poisson helpers and plain-text number formatting shared by the CSV writers.

use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for i in 1..LN_FACT_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < LN_FACT_TABLE {
        return ln_fact_table()[n as usize];
    }
    // Stirling series; the first omitted term is below 1e-17 here.
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
}

/// `P(X = m)` for `X ~ Poisson(rho)`.
pub fn poisson_pmf(rho: f64, m: u64) -> f64 {
    if rho == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    (-rho + m as f64 * rho.ln() - ln_factorial(m)).exp()
}

/// `e^{-rho} rho^{m-1} / m!`, i.e. `P(X = m) / rho` without the division.
/// Zero for `m = 0`.
pub fn poisson_pmf_over_rate(rho: f64, m: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if rho == 0.0 {
        return if m == 1 { 1.0 } else { 0.0 };
    }
    (-rho + (m - 1) as f64 * rho.ln() - ln_factorial(m)).exp()
}

/// Chernoff bound on `P(X >= m)` for `X ~ Poisson(rho)`.
pub fn poisson_tail_bound(rho: f64, m: u64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if rho == 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    if mf <= rho {
        return 1.0;
    }
    (-rho + mf - mf * (mf / rho).ln()).exp().min(1.0)
}

/// `sum_{m >= from} weight(m)` for a Poisson-shaped summand, stopping once the
/// terms are past the mode and negligible.
pub(crate) fn poisson_series_from(rho: f64, from: u64, weight: impl Fn(u64) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut m = from;
    loop {
        let term = weight(m);
        sum += term;
        if (m as f64) > rho + 1.0 && (term <= sum * 1e-18 || term == 0.0) {
            return sum;
        }
        m += 1;
    }
}

/// Formats with 12 significant digits, `%g` style, independent of locale.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-12);
        let direct: f64 = (1..=5000u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(5000) - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn pmf_sums_to_one() {
        for rho in [0.0, 0.3, 4.0, 40.0] {
            let s: f64 = (0..400).map(|m| poisson_pmf(rho, m)).sum();
            assert!((s - 1.0).abs() < 1e-12, "rho={rho} sum={s}");
        }
        assert!((poisson_pmf_over_rate(2.0, 3) - poisson_pmf(2.0, 3) / 2.0).abs() < 1e-15);
        assert_eq!(poisson_pmf_over_rate(0.0, 1), 1.0);
    }

    #[test]
    fn tail_bound_dominates_tail() {
        for rho in [0.1, 1.0, 5.0, 20.0] {
            for m in 0..80u64 {
                let tail: f64 = (m..400).map(|j| poisson_pmf(rho, j)).sum();
                assert!(poisson_tail_bound(rho, m) >= tail - 1e-15, "rho={rho} m={m}");
            }
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(std::f64::consts::E.recip()), "0.367879441171");
        assert_eq!(fmt_sig(1.0e-5), "0.00001");
        assert_eq!(fmt_sig(1.234e-7), "1.234e-07");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_sig(292.0), "292");
    }
}
