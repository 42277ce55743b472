use std::fmt::Write;

/// Significant digits used for every number the command line prints.
pub const SIGNIFICANT_DIGITS: usize = 15;

/// Formats like C's `%.15g`: 15 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-5, 1e15)`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn num_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

/// Accumulates `key: value` lines and CSV blocks.
#[derive(Default)]
pub struct Report {
    out: String,
}

impl Report {
    pub fn kv(&mut self, key: &str, value: impl AsRef<str>) -> &mut Self {
        let _ = writeln!(self.out, "{key}: {}", value.as_ref());
        self
    }

    pub fn line(&mut self, line: impl AsRef<str>) -> &mut Self {
        self.out.push_str(line.as_ref());
        self.out.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn like_percent_g() {
        assert_eq!(num(3.0 / 11.0), "0.272727272727273");
        assert_eq!(num(0.6), "0.6");
        assert_eq!(num(-1.0 / 3.0), "-0.333333333333333");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(2000.0), "2000");
        assert_eq!(num(1.5e-7), "1.5e-07");
        assert_eq!(num(1e20), "1e+20");
        assert_eq!(num(123456.789), "123456.789");
        assert_eq!(num(0.0001), "0.0001");
    }
}
