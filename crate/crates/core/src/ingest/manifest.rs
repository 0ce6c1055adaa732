use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::taxonomy::Taxonomy;

/// Object-name patterns mapped to class names, one `pattern = Class` per line.
///
/// Patterns are matched against the mesh file stem; `*` matches any run of
/// characters and `?` a single character. `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassManifest {
    pub entries: Vec<(String, String)>,
}

impl ClassManifest {
    pub fn parse(text: &str) -> Result<ClassManifest> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (pattern, class) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, message: "expected 'pattern = Class'".into() })?;
            let (pattern, class) = (pattern.trim(), class.trim());
            if pattern.is_empty() || class.is_empty() {
                return Err(Error::Parse { line, message: "empty pattern or class".into() });
            }
            if entries.iter().any(|(p, _)| p == pattern) {
                return Err(Error::Parse { line, message: format!("duplicate pattern '{pattern}'") });
            }
            entries.push((pattern.to_string(), class.to_string()));
        }
        Ok(ClassManifest { entries })
    }

    pub fn read(path: &Path) -> Result<ClassManifest> {
        let text = fs::read_to_string(path).map_err(Error::io_at(path))?;
        Self::parse(&text)
    }

    pub fn push(&mut self, pattern: impl Into<String>, class: impl Into<String>) {
        self.entries.push((pattern.into(), class.into()));
    }

    /// Fails with `ClassUnknown` on the first class name `taxonomy` lacks.
    pub fn check_classes(&self, taxonomy: &Taxonomy) -> Result<()> {
        for (_, class) in &self.entries {
            taxonomy.resolve(class)?;
        }
        Ok(())
    }

    /// Class id for an object name; exactly one entry must match.
    pub fn classify(&self, name: &str, taxonomy: &Taxonomy) -> Result<u8> {
        let hits: Vec<&(String, String)> = self.entries.iter().filter(|(p, _)| glob_match(p, name)).collect();
        match hits.as_slice() {
            [] => Err(Error::UnmatchedObject(name.to_string())),
            [(_, class)] => taxonomy.resolve(class),
            many => Err(Error::AmbiguousObject {
                name: name.to_string(),
                patterns: many.iter().map(|(p, _)| p.clone()).collect(),
            }),
        }
    }
}

impl fmt::Display for ClassManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, c) in &self.entries {
            writeln!(f, "{p} = {c}")?;
        }
        Ok(())
    }
}

/// Wildcard match with `*` and `?` over the whole of `text`.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::gold;

    #[test]
    fn globbing() {
        assert!(glob_match("wall*", "wall_01"));
        assert!(glob_match("wall*", "wall"));
        assert!(!glob_match("wall*", "slab_01"));
        assert!(glob_match("*_door", "004_door"));
        assert!(glob_match("w?ll_*1", "wall_01"));
        assert!(!glob_match("w?ll", "wll"));
        assert!(glob_match("*a*b*", "xxaxxbxx"));
        assert!(glob_match("exact", "exact"));
        assert!(!glob_match("exact", "exact2"));
    }

    #[test]
    fn parse_and_classify() {
        let m = ClassManifest::parse("# classes\nwall* = Wall\r\nslab* = Slab\n\nfire* = Fire terminal # note\n").unwrap();
        assert_eq!(m.entries.len(), 3);
        assert_eq!(m.classify("wall_01", gold()).unwrap(), 15);
        assert_eq!(m.classify("fire_ext", gold()).unwrap(), 6);
        assert!(matches!(m.classify("chair_3", gold()), Err(Error::UnmatchedObject(n)) if n == "chair_3"));
        assert_eq!(ClassManifest::parse(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn ambiguity_and_unknown_classes() {
        let m = ClassManifest::parse("w* = Wall\nwa* = Window\n").unwrap();
        assert!(matches!(m.classify("wall", gold()), Err(Error::AmbiguousObject { .. })));
        let m = ClassManifest::parse("sofa* = Sofa\n").unwrap();
        assert!(matches!(m.check_classes(gold()), Err(Error::ClassUnknown { class, .. }) if class == "Sofa"));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(ClassManifest::parse("wall Wall\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ClassManifest::parse("a = Wall\na = Slab\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ClassManifest::parse(" = Wall\n"), Err(Error::Parse { .. })));
    }
}
