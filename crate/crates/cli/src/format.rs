//! Locale-free numeric formatting: 9 significant digits, '.' separator,
//! trailing zeros trimmed (the shape of C's `%.9g`).

pub fn g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    let mut out = if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        let s = format!("{x:.8e}");
        // Normalize the exponent rendering: no plus sign, no leading zeros.
        let (mant, e) = s.split_once('e').unwrap();
        let e: i32 = e.parse().unwrap();
        let mant = trim_zeros(mant);
        return format!("{mant}e{e:+03}");
    };
    if out.contains('.') {
        out = trim_zeros(&out);
    }
    out
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}
