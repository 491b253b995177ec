//! Fixed significant-digit formatting used by tables and CSV export.

/// Formats `value` in positional notation with exactly `digits` significant
/// digits, rounding half away from zero.
///
/// Trailing zeros are kept, so `3.0` at ten digits prints as `3.000000000`.
pub fn significant(value: f64, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit");
    if value.is_nan() {
        return "NaN".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if value == 0.0 {
        return positional(false, &"0".repeat(digits), 0);
    }
    // Forty guard digits settle the half-away decision for any f64 of
    // moderate magnitude.
    let guard = 40;
    let sci = format!("{:.*e}", digits + guard - 1, value.abs());
    let (mantissa, exponent) = sci.split_once('e').expect("exponent marker");
    let mut exponent: i32 = exponent.parse().expect("integer exponent");
    let all: Vec<u8> = mantissa.bytes().filter(u8::is_ascii_digit).collect();
    let mut kept: Vec<u8> = all[..digits].to_vec();
    if all[digits] >= b'5' {
        let mut i = digits;
        loop {
            if i == 0 {
                kept.insert(0, b'1');
                kept.pop();
                exponent += 1;
                break;
            }
            i -= 1;
            if kept[i] == b'9' {
                kept[i] = b'0';
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let kept = String::from_utf8(kept).expect("ascii digits");
    positional(value < 0.0, &kept, exponent)
}

/// Lays out the digit string `d0 d1 d2 ...` meaning `d0.d1d2... * 10^exponent`.
pub(crate) fn positional(negative: bool, digits: &str, exponent: i32) -> String {
    let mut out = String::with_capacity(digits.len() + 8);
    if negative {
        out.push('-');
    }
    if exponent >= 0 {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            out.push_str(digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exponent - 1) as usize));
        out.push_str(digits);
    }
    out
}
