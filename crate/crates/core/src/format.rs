//! Locale-independent number formatting for CLI output.

/// Significant digits printed by the CLI.
pub const SIGNIFICANT_DIGITS: usize = 15;

/// Formats `v` with 15 significant digits, trailing zeros removed.
///
/// Plain positional notation is used at every magnitude (`0.2`,
/// `0.333333333333333`, `0.0000123`); `sci` switches to `d.ddde±x` form.
pub fn format_sig(v: f64, sci: bool) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    // Rust's exponent formatting rounds correctly and yields exactly 15 digits.
    let e_form = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = e_form.split_once('e').expect("exponent form always has an 'e'");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };

    if sci {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }

    let body = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let int_len = exp as usize + 1;
        if digits.len() <= int_len {
            format!("{digits}{}", "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    format!("{sign}{body}")
}

/// `v` rounded to the value printed by [`format_sig`].
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format_sig(v, true).parse().unwrap_or(v)
}
