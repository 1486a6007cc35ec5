//! Attribute name mapping: a plain-text `attrs.map` beside the public key
//! translates human names to numeric attribute ids in `--attrs` lists and
//! policy expressions.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{CliError, CliResult};

pub const TEMPLATE: &str = "\
# Attribute name map. One \"name=id\" line per attribute; ids are the
# numeric attributes issued by this authority (1..=N). Names may be used
# in --attrs lists and in policy expressions. Lines starting with '#'
# are ignored. Examples:
#   finance=1
#   admin=2
";

#[derive(Debug, Default)]
pub struct AttrMap {
    names: BTreeMap<String, u32>,
}

impl AttrMap {
    pub fn empty() -> Self {
        AttrMap::default()
    }

    /// Loads the map; a missing file is an empty map.
    pub fn load(path: &Path) -> CliResult<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(AttrMap::empty()),
            Err(e) => Err(CliError::Malformed(format!(
                "cannot read {}: {e}",
                path.display()
            ))),
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut names = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, id) = line.split_once('=').ok_or_else(|| {
                CliError::Malformed(format!("attrs.map line {}: expected name=id", lineno + 1))
            })?;
            let name = name.trim().to_string();
            let id: u32 = id.trim().parse().map_err(|_| {
                CliError::Malformed(format!("attrs.map line {}: bad id", lineno + 1))
            })?;
            if id == 0 {
                return Err(CliError::Malformed(format!(
                    "attrs.map line {}: ids are 1-based",
                    lineno + 1
                )));
            }
            if names.insert(name.clone(), id).is_some() {
                return Err(CliError::Malformed(format!(
                    "attrs.map line {}: duplicate name '{name}'",
                    lineno + 1
                )));
            }
        }
        Ok(AttrMap { names })
    }

    /// Resolves one `--attrs` token: a numeric id or a mapped name.
    pub fn resolve_attr(&self, token: &str) -> CliResult<u32> {
        if token.bytes().all(|b| b.is_ascii_digit()) {
            return token
                .parse::<u32>()
                .ok()
                .filter(|&id| id != 0)
                .ok_or_else(|| CliError::Usage(format!("bad attribute id '{token}'")));
        }
        self.names
            .get(token)
            .copied()
            .ok_or_else(|| CliError::Usage(format!("unknown attribute name '{token}'")))
    }

    /// Rewrites mapped names inside a policy expression into `attN` leaves.
    /// Keywords and already-numeric leaves pass through untouched.
    pub fn resolve_policy(&self, text: &str) -> CliResult<String> {
        let mut out = String::with_capacity(text.len());
        let mut chars = text.char_indices().peekable();
        while let Some((start, c)) = chars.next() {
            if !(c.is_ascii_alphabetic() || c == '_') {
                out.push(c);
                continue;
            }
            let mut end = start + c.len_utf8();
            while let Some(&(i, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    chars.next();
                    end = i + d.len_utf8();
                } else {
                    break;
                }
            }
            let word = &text[start..end];
            let is_leaf = word
                .strip_prefix("att")
                .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()));
            if matches!(word, "and" | "or" | "thresh") || is_leaf {
                out.push_str(word);
            } else if let Some(id) = self.names.get(word) {
                out.push_str(&format!("att{id}"));
            } else {
                return Err(CliError::Usage(format!(
                    "unknown attribute name '{word}' in policy"
                )));
            }
        }
        Ok(out)
    }
}
