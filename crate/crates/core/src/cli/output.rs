//! CSV text with locale-free numbers at nine significant digits.

use std::fmt::Write as _;

/// `v` with nine significant digits; fixed notation between `1e-5` and
/// `1e15`, scientific outside.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&exp) {
        format!("{v:.*}", (8 - exp).max(0) as usize)
    } else {
        sci
    }
}

#[derive(Debug, Default, Clone)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        let mut c = Csv::default();
        c.comment_free_header(columns);
        c
    }

    /// Starts with `# ` comment lines, then the header.
    pub fn with_comments(comments: &[String], columns: &[&str]) -> Self {
        let mut c = Csv::default();
        for line in comments {
            let _ = writeln!(c.text, "# {line}");
        }
        c.comment_free_header(columns);
        c
    }

    fn comment_free_header(&mut self, columns: &[&str]) {
        self.text.push_str(&columns.join(","));
        self.text.push('\n');
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
