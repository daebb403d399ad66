//! Plain-text key/value files with one level of sections.
//!
//! Grammar, one construct per line:
//!
//! ```text
//! # comment            (also `;`)
//! [section name]
//! key = value
//! ```
//!
//! Keys appearing before the first section header belong to the unnamed
//! section `""`. Whitespace around keys and values is trimmed. Values are
//! kept as raw strings; typed access goes through [`KvSection::parse`].
//! Entry order is preserved and duplicate keys within a section are rejected.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvSection {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl KvSection {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    /// Typed lookup; `Ok(None)` when the key is absent.
    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                Error::InvalidParameter(format!("[{}] {key} = {raw}: {e}", self.name))
            }),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| {
            Error::InvalidParameter(format!("missing key `{key}` in section [{}]", self.name))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvDocument {
    pub sections: Vec<KvSection>,
}

impl KvDocument {
    pub fn section(&self, name: &str) -> Option<&KvSection> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn push(&mut self, section: KvSection) {
        self.sections.push(section);
    }
}

impl FromStr for KvDocument {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut doc = KvDocument::default();
        let mut current = KvSection::new("");
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("unterminated section header `{line}`"),
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "empty section name".into(),
                    });
                }
                if current.name == name || doc.section(name).is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                let finished = std::mem::replace(&mut current, KvSection::new(name));
                if !finished.name.is_empty() || !finished.entries.is_empty() {
                    doc.sections.push(finished);
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty key".into(),
                });
            }
            if current.get(key).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}` in section [{}]", current.name),
                });
            }
            current.push(key, value.trim());
        }
        if !current.name.is_empty() || !current.entries.is_empty() {
            doc.sections.push(current);
        }
        Ok(doc)
    }
}

impl fmt::Display for KvDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, section) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if !section.name.is_empty() {
                writeln!(f, "[{}]", section.name)?;
            }
            for (k, v) in &section.entries {
                writeln!(f, "{k} = {v}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_preamble() {
        let doc: KvDocument = "top = 1\n# note\n[a]\nx = 2.5\n y =  hello world \n[b]\n"
            .parse()
            .unwrap();
        assert_eq!(doc.sections.len(), 3);
        assert_eq!(doc.section("").unwrap().get("top"), Some("1"));
        let a = doc.section("a").unwrap();
        assert_eq!(a.require::<f64>("x").unwrap(), 2.5);
        assert_eq!(a.get("y"), Some("hello world"));
        assert!(doc.section("b").unwrap().entries.is_empty());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            "[a\nx=1".parse::<KvDocument>(),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            "[a]\njunk".parse::<KvDocument>(),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!("[a]\nx=1\nx=2".parse::<KvDocument>().is_err());
        assert!("[a]\n[a]".parse::<KvDocument>().is_err());
    }

    #[test]
    fn typed_lookup_reports_key() {
        let doc: KvDocument = "[s]\nn = abc".parse().unwrap();
        let err = doc.section("s").unwrap().parse::<u32>("n").unwrap_err();
        assert!(err.to_string().contains("n = abc"));
        assert!(doc.section("s").unwrap().require::<u32>("missing").is_err());
    }

    #[test]
    fn display_reparses_identically() {
        let text = "[one]\na = 1\nb = x y\n\n[two]\nc = 3\n";
        let doc: KvDocument = text.parse().unwrap();
        assert_eq!(doc.to_string(), text);
        assert_eq!(doc.to_string().parse::<KvDocument>().unwrap(), doc);
    }
}
