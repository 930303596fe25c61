//! Flat `key = value` configuration text.
//!
//! ```text
//! file    := line*
//! line    := blank | comment | section | entry
//! comment := '#' any*
//! section := '[' name ']'
//! entry   := key '=' value          (value may be a comma-separated list)
//! ```
//!
//! Keys before the first section belong to the section `""`. Whitespace
//! around keys, values and list items is ignored. Repeated keys are errors.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KvConfig {
    /// section -> key -> (value, line)
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current = String::new();
        sections.insert(current.clone(), BTreeMap::new());
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(rest) = l.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "section header must end with `]`"))?
                    .trim();
                if name.is_empty() {
                    return Err(parse_err(line, "empty section name"));
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = l
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected `key = value`, found {l:?}")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(parse_err(line, "empty key"));
            }
            let section = sections.get_mut(&current).unwrap();
            if section.contains_key(key) {
                return Err(parse_err(line, format!("key {key:?} repeated in section [{current}]")));
            }
            section.insert(key.to_string(), (value.trim().to_string(), line));
        }
        Ok(KvConfig { sections })
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// Keys of a section, in sorted order.
    pub fn keys(&self, section: &str) -> Vec<&str> {
        self.sections
            .get(section)
            .map(|s| s.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    /// Fails on the first key of `section` not listed in `known`.
    pub fn reject_unknown(&self, section: &str, known: &[&str]) -> Result<()> {
        if let Some(s) = self.sections.get(section) {
            for (k, (_, line)) in s {
                if !known.contains(&k.as_str()) {
                    return Err(parse_err(*line, format!("unknown key {k:?} in section [{section}]")));
                }
            }
        }
        Ok(())
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|(v, l)| (v.as_str(), *l))
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| parse_err(line, format!("cannot parse {key} = {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    /// A comma-separated list; an empty value is the empty list.
    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((v, line)) => {
                if v.is_empty() {
                    return Ok(Some(Vec::new()));
                }
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse()
                            .map_err(|_| parse_err(line, format!("cannot parse list item {item:?} of {key}")))
                    })
                    .collect::<Result<Vec<T>>>()
                    .map(Some)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_lists() {
        let c = KvConfig::parse("top = 1\n# note\n[sweep]\nn = 10, 12 ,14\np =\nname = a b\n").unwrap();
        assert_eq!(c.get::<u32>("", "top").unwrap(), Some(1));
        assert_eq!(c.list::<usize>("sweep", "n").unwrap(), Some(vec![10, 12, 14]));
        assert_eq!(c.list::<f64>("sweep", "p").unwrap(), Some(vec![]));
        assert_eq!(c.get::<String>("sweep", "name").unwrap().as_deref(), Some("a b"));
        assert_eq!(c.get::<u32>("sweep", "missing").unwrap(), None);
        assert_eq!(c.keys("sweep"), vec!["n", "name", "p"]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = KvConfig::parse("[a]\nx = 1\nx = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = KvConfig::parse("\n\njunk\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let c = KvConfig::parse("[a]\nx = 1, y\n").unwrap();
        assert!(matches!(
            c.list::<u8>("a", "x").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            c.reject_unknown("a", &["z"]).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(KvConfig::parse("[a\n").is_err());
    }
}
