//! Plain-text certificates with a trailing content digest.
//!
//! ```text
//! ramsey-certificate 1
//! kind: arrow
//! command: arrow lo6.st lo3.st lo2.st --colors 2
//! config: budget=10000000 seed=0 ...
//! verdict: HOLDS
//! field: value
//! begin structure C
//! ...
//! end
//! digest: sha256:<hex of every preceding byte>
//! ```

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const HEADER: &str = "ramsey-certificate 1";

#[derive(Debug, Error)]
pub enum CertError {
    #[error("not a certificate: {0}")]
    Malformed(String),
    #[error("digest mismatch: recorded {recorded}, computed {computed}")]
    Digest { recorded: String, computed: String },
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("missing section `{0}`")]
    MissingSection(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub kind: String,
    pub name: String,
    pub lines: Vec<String>,
}

impl Section {
    pub fn new(kind: &str, name: &str) -> Self {
        Section {
            kind: kind.to_string(),
            name: name.to_string(),
            lines: Vec::new(),
        }
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub kind: String,
    pub command: String,
    pub config: String,
    pub verdict: String,
    /// Ordered `key: value` payload lines.
    pub fields: Vec<(String, String)>,
    pub sections: Vec<Section>,
}

impl Certificate {
    pub fn new(kind: &str, command: String, config: String, verdict: impl ToString) -> Self {
        Certificate {
            kind: kind.to_string(),
            command,
            config,
            verdict: verdict.to_string(),
            fields: Vec::new(),
            sections: Vec::new(),
        }
    }

    pub fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn section(&mut self, kind: &str, name: &str, text: &str) -> &mut Self {
        let mut s = Section::new(kind, name);
        s.lines = text.lines().map(str::to_string).collect();
        self.sections.push(s);
        self
    }

    pub fn get(&self, key: &str) -> Result<&str, CertError> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| CertError::Missing(key.to_string()))
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.fields.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn find(&self, kind: &str, name: &str) -> Result<&Section, CertError> {
        self.sections
            .iter()
            .find(|s| s.kind == kind && s.name == name)
            .ok_or_else(|| CertError::MissingSection(format!("{kind} {name}")))
    }

    pub fn sections_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.kind == kind)
    }

    fn body(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "kind: {}", self.kind).unwrap();
        writeln!(out, "command: {}", self.command).unwrap();
        writeln!(out, "config: {}", self.config).unwrap();
        writeln!(out, "verdict: {}", self.verdict).unwrap();
        for (k, v) in &self.fields {
            writeln!(out, "{k}: {v}").unwrap();
        }
        for s in &self.sections {
            writeln!(out, "begin {} {}", s.kind, s.name).unwrap();
            for l in &s.lines {
                writeln!(out, "{l}").unwrap();
            }
            writeln!(out, "end {}", s.kind).unwrap();
        }
        out
    }

    pub fn render(&self) -> String {
        let body = self.body();
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        format!("{body}digest: sha256:{digest}\n")
    }

    pub fn parse(text: &str) -> Result<Self, CertError> {
        let (body, last) = text
            .trim_end_matches('\n')
            .rsplit_once('\n')
            .ok_or_else(|| CertError::Malformed("too short".into()))?;
        let recorded = last
            .strip_prefix("digest: sha256:")
            .ok_or_else(|| CertError::Malformed("no trailing digest line".into()))?;
        let body = format!("{body}\n");
        let computed = hex::encode(Sha256::digest(body.as_bytes()));
        if computed != recorded {
            return Err(CertError::Digest {
                recorded: recorded.to_string(),
                computed,
            });
        }
        let mut lines = body.lines();
        if lines.next() != Some(HEADER) {
            return Err(CertError::Malformed("bad header".into()));
        }
        let mut head = |key: &str| -> Result<String, CertError> {
            lines
                .next()
                .and_then(|l| l.strip_prefix(&format!("{key}: ")).map(str::to_string))
                .ok_or_else(|| CertError::Missing(key.to_string()))
        };
        let kind = head("kind")?;
        let command = head("command")?;
        let config = head("config")?;
        let verdict = head("verdict")?;
        let mut cert = Certificate::new(&kind, command, config, verdict);
        let mut current: Option<Section> = None;
        for line in lines {
            if let Some(sec) = current.as_mut() {
                if line == format!("end {}", sec.kind) {
                    cert.sections.push(current.take().expect("open section"));
                } else {
                    sec.lines.push(line.to_string());
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("begin ") {
                let (kind, name) = rest.split_once(' ').unwrap_or((rest, ""));
                current = Some(Section::new(kind, name));
            } else if let Some((k, v)) = line.split_once(": ") {
                cert.fields.push((k.to_string(), v.to_string()));
            } else {
                return Err(CertError::Malformed(format!("cannot read `{line}`")));
            }
        }
        if let Some(sec) = current {
            return Err(CertError::Malformed(format!("unterminated section `{} {}`", sec.kind, sec.name)));
        }
        Ok(cert)
    }
}

/// Writes `text` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
