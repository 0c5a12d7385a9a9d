//! Instruction template registry.
//!
//! Templates are grouped by prompt family (a task, or a task variant such as
//! `classification_options`). Patterns may use `{options}`, `{name_kind}`
//! and `{k}`; nothing else. The built-in registry ships as
//! `templates/default.json` and a user file can replace individual groups.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GenError;
use crate::rng::DetRng;
use crate::taxonomy::NameKind;

const BUILTIN: &str = include_str!("../../templates/default.json");

pub const PLACEHOLDERS: [&str; 3] = ["options", "name_kind", "k"];

/// Every group the generators draw from, and whether its patterns must
/// show the option list.
pub const GROUPS: [(&str, bool); 15] = [
    ("classification", false),
    ("classification_options", true),
    ("classification_all", false),
    ("detection", true),
    ("captioning", false),
    ("calltype", true),
    ("lifestage", true),
    ("count_speakers", false),
    ("count_individuals", false),
    ("mixture_count", false),
    ("mixture_names", false),
    ("pitch", false),
    ("instrument", false),
    ("velocity", false),
    ("quality", false),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub template_id: String,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRegistry {
    groups: BTreeMap<String, Vec<Template>>,
}

impl TemplateRegistry {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("built-in template registry is valid")
    }

    /// Parses and validates a complete registry.
    pub fn from_json(text: &str) -> Result<Self, GenError> {
        let groups: BTreeMap<String, Vec<Template>> =
            serde_json::from_str(text).map_err(|e| GenError::Templates(e.to_string()))?;
        let reg = Self { groups };
        reg.validate(true)?;
        Ok(reg)
    }

    /// Built-in registry with the groups present in `path` replaced.
    pub fn builtin_with_overrides(path: impl AsRef<Path>) -> Result<Self, GenError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| GenError::Templates(format!("{}: {e}", path.as_ref().display())))?;
        let overrides: BTreeMap<String, Vec<Template>> =
            serde_json::from_str(&text).map_err(|e| GenError::Templates(e.to_string()))?;
        let partial = Self { groups: overrides };
        partial.validate(false)?;
        let mut reg = Self::builtin();
        reg.groups.extend(partial.groups);
        Ok(reg)
    }

    fn validate(&self, complete: bool) -> Result<(), GenError> {
        for name in self.groups.keys() {
            if !GROUPS.iter().any(|(g, _)| g == name) {
                return Err(GenError::Templates(format!("unknown template group {name:?}")));
            }
        }
        for (name, needs_options) in GROUPS {
            let Some(list) = self.groups.get(name) else {
                if complete {
                    return Err(GenError::Templates(format!("missing template group {name:?}")));
                }
                continue;
            };
            if list.is_empty() {
                return Err(GenError::Templates(format!("group {name:?} has no templates")));
            }
            for t in list {
                let used = placeholders(&t.pattern).map_err(|e| GenError::Templates(format!("{}: {e}", t.template_id)))?;
                if let Some(bad) = used.iter().find(|p| !PLACEHOLDERS.contains(&p.as_str())) {
                    return Err(GenError::Templates(format!("{}: unknown placeholder {{{bad}}}", t.template_id)));
                }
                if needs_options && !used.iter().any(|p| p == "options") {
                    return Err(GenError::Templates(format!("{}: pattern must contain {{options}}", t.template_id)));
                }
            }
        }
        Ok(())
    }

    pub fn group(&self, name: &str) -> &[Template] {
        self.groups.get(name).map_or(&[], Vec::as_slice)
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &[Template])> {
        self.groups.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Uniform seeded choice within a group.
    pub fn pick(&self, name: &str, rng: &mut DetRng) -> &Template {
        let list = self.group(name);
        &list[rng.below(list.len())]
    }
}

fn placeholders(pattern: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or("unclosed '{'")?;
        out.push(after[..close].to_string());
        rest = &after[close + 1..];
    }
    if rest.contains('}') {
        return Err("unmatched '}'".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RenderCtx<'a> {
    pub options: Option<&'a [String]>,
    pub name_kind: Option<NameKind>,
}

pub fn render(pattern: &str, ctx: &RenderCtx<'_>) -> String {
    let mut s = pattern.to_string();
    if let Some(opts) = ctx.options {
        s = s.replace("{options}", &opts.join(", "));
        s = s.replace("{k}", &opts.len().to_string());
    }
    if let Some(kind) = ctx.name_kind {
        let label = match kind {
            NameKind::Scientific => "scientific name",
            NameKind::Common => "common name",
        };
        s = s.replace("{name_kind}", label);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_three_paraphrases_per_group() {
        let reg = TemplateRegistry::builtin();
        for (name, _) in GROUPS {
            assert!(reg.group(name).len() >= 3, "{name}");
        }
        let mut ids: Vec<_> = reg.groups().flat_map(|(_, l)| l.iter().map(|t| t.template_id.clone())).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n, "template ids must be unique");
    }

    #[test]
    fn rejects_unknown_placeholder() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        std::fs::write(&p, r#"{"pitch": [{"template_id": "x", "pattern": "What is {pitch}?"}]}"#).unwrap();
        assert!(TemplateRegistry::builtin_with_overrides(&p).is_err());
    }

    #[test]
    fn options_group_needs_options_placeholder() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        std::fs::write(&p, r#"{"detection": [{"template_id": "x", "pattern": "Anything here?"}]}"#).unwrap();
        assert!(TemplateRegistry::builtin_with_overrides(&p).is_err());
    }

    #[test]
    fn override_replaces_one_group() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        std::fs::write(&p, r#"{"pitch": [{"template_id": "p.custom", "pattern": "Pitch in Hz?"}]}"#).unwrap();
        let reg = TemplateRegistry::builtin_with_overrides(&p).unwrap();
        assert_eq!(reg.group("pitch").len(), 1);
        assert_eq!(reg.group("velocity"), TemplateRegistry::builtin().group("velocity"));
    }

    #[test]
    fn incomplete_full_registry_rejected() {
        assert!(TemplateRegistry::from_json(r#"{"pitch": [{"template_id": "p", "pattern": "Hz?"}]}"#).is_err());
        assert!(TemplateRegistry::from_json(r#"{"nope": []}"#).is_err());
    }

    #[test]
    fn render_fills_placeholders() {
        let opts = vec!["A".to_string(), "B".to_string()];
        let s = render(
            "Pick the {name_kind} from {k} options: {options}.",
            &RenderCtx {
                options: Some(&opts),
                name_kind: Some(NameKind::Common),
            },
        );
        assert_eq!(s, "Pick the common name from 2 options: A, B.");
    }

    #[test]
    fn placeholder_parsing() {
        assert_eq!(placeholders("a {x} b {y}").unwrap(), ["x", "y"]);
        assert!(placeholders("a {x").is_err());
        assert!(placeholders("a }").is_err());
    }
}
