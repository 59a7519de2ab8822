//! Layout files: one user per line, `x y` or `x y x_pin`, separated by
//! whitespace or commas. `#` starts a comment; blank lines are skipped.
//! Either every line carries `x_pin` or none does.

use crate::error::{Error, Result};
use crate::model::{AntennaLayout, User, UserLayout};

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutFile {
    pub users: UserLayout,
    pub antennas: Option<AntennaLayout>,
}

pub fn parse_layout(text: &str, path: &str) -> Result<LayoutFile> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut users = Vec::new();
    let mut pins = Vec::new();
    let mut width = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(line, format!("expected `x y` or `x y x_pin`, found {} fields", fields.len())));
        }
        if *width.get_or_insert(fields.len()) != fields.len() {
            return Err(err(line, "x_pin must be given on every line or on none".into()));
        }
        let mut vals = [0.0; 3];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("`{f}` is not a finite number")))?;
        }
        if let Some(prev) = users.last().map(|u: &User| u.x) {
            if vals[0] < prev {
                return Err(err(line, format!("users must be sorted by x; {} follows {prev}", vals[0])));
            }
        }
        users.push(User::new(vals[0], vals[1]));
        if fields.len() == 3 {
            pins.push(vals[2]);
        }
    }
    if users.is_empty() {
        return Err(err(0, "no users".into()));
    }
    Ok(LayoutFile {
        users: UserLayout::new(users),
        antennas: (!pins.is_empty()).then(|| AntennaLayout::new(pins)),
    })
}

pub fn read_layout(path: &std::path::Path) -> Result<LayoutFile> {
    let text = std::fs::read_to_string(path)?;
    parse_layout(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_comments_and_separators() {
        let f = parse_layout("# users\n-5, 1.5\n\n 4.0\t-2 # right\n", "t").unwrap();
        assert_eq!(f.users.users, vec![User::new(-5.0, 1.5), User::new(4.0, -2.0)]);
        assert!(f.antennas.is_none());
        let f = parse_layout("-5 0 -4\n5 0 4\n", "t").unwrap();
        assert_eq!(f.antennas.unwrap().x_pin, vec![-4.0, 4.0]);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("1 2\n3\n", 2),
            ("1 2\nx 2\n", 2),
            ("1 2 3\n\n4 5\n", 3),
            ("4 0\n1 0\n", 2),
            ("1 nan\n", 1),
            ("# nothing\n", 0),
        ];
        for (text, want) in cases {
            match parse_layout(text, "f.txt") {
                Err(Error::Parse { line, path, .. }) => {
                    assert_eq!(line, want, "{text:?}");
                    assert_eq!(path, "f.txt");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
