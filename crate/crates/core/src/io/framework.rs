//! Framework JSON documents.
//!
//! ```json
//! { "arguments": ["a", "b", "c"], "attacks": [["a", "b"], ["b", "c"]] }
//! ```
//!
//! With `"symmetric": true` each unordered pair is listed once and the
//! framework must be irreflexive.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::af::{ArgumentNames, ArgumentationFramework, NamedFramework};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameworkDoc {
    arguments: Vec<String>,
    #[serde(default)]
    attacks: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    symmetric: bool,
}

pub fn parse_framework(text: &str) -> Result<NamedFramework> {
    if text.trim().is_empty() {
        return Err(Error::Schema("empty framework file".into()));
    }
    let doc: FrameworkDoc = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
    if doc.arguments.is_empty() {
        return Err(Error::Schema("framework has no arguments".into()));
    }
    let names = ArgumentNames::new(doc.arguments)?;
    let mut pairs = Vec::with_capacity(doc.attacks.len());
    for (i, (a, b)) in doc.attacks.iter().enumerate() {
        let lookup = |name: &str| {
            names.index(name).ok_or_else(|| {
                Error::Schema(format!("attack #{i} references unknown argument `{name}`"))
            })
        };
        pairs.push((lookup(a)?, lookup(b)?));
    }
    let framework = if doc.symmetric {
        ArgumentationFramework::symmetric(names.len(), &pairs)
    } else {
        ArgumentationFramework::new(names.len(), &pairs)
    }
    .map_err(|e| match e {
        Error::Input(msg) => Error::Schema(msg),
        other => other,
    })?;
    Ok(NamedFramework { names, framework })
}

pub fn framework_to_json(nf: &NamedFramework) -> String {
    let symmetric = nf.framework.is_symmetric();
    let attacks = nf
        .framework
        .attack_pairs()
        .into_iter()
        .filter(|&(a, b)| !symmetric || a < b)
        .map(|(a, b)| (nf.names.name(a).to_string(), nf.names.name(b).to_string()))
        .collect();
    let doc = FrameworkDoc {
        arguments: nf.names.as_slice().to_vec(),
        attacks,
        symmetric,
    };
    serde_json::to_string_pretty(&doc).expect("framework documents always serialize")
}

pub fn load_framework(path: impl AsRef<Path>) -> Result<NamedFramework> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_framework(&text)
}

pub fn save_framework(path: impl AsRef<Path>, nf: &NamedFramework) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, framework_to_json(nf) + "\n").map_err(|e| Error::io(path, e))
}
