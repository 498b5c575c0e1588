//! Line-oriented `key: value` run reports.

use std::fmt;

/// An ordered list of `key: value` lines. Keys may repeat, which is how
/// tables are written (one `row:` line per row).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    entries: Vec<(String, String)>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        let mut r = RunReport::default();
        r.push("command", command);
        r
    }

    /// Appends a line; newlines in the value are replaced by spaces.
    pub fn push(&mut self, key: &str, value: impl fmt::Display) {
        debug_assert!(valid_key(key), "bad report key {key}");
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.to_string(), value));
    }

    /// First value recorded under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(": ").or_else(|| line.strip_suffix(':').map(|k| (k, ""))).ok_or_else(|| {
                format!("line {}: expected `key: value`", i + 1)
            })?;
            if !valid_key(k) {
                return Err(format!("line {}: invalid key `{k}`", i + 1));
            }
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(RunReport { entries })
    }
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.')
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            if v.is_empty() {
                writeln!(f, "{k}:")?;
            } else {
                writeln!(f, "{k}: {v}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = RunReport::new("ramsey");
        r.push("seed", 3);
        r.push("row", "K5 >= 1/3");
        r.push("row", "K6 >= 1/2");
        r.push("note", "");
        let back = RunReport::parse(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.get_all("row").count(), 2);
        assert!(RunReport::parse("no separator").is_err());
    }
}
