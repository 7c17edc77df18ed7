//! Text and JSON gluing tables.
//!
//! Text lines look like `tet 0: 1 0132 | 1 1230 | 1 2310 | 1 2103` (an unglued face is `-`)
//! and `vertex 2: material`. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::TriError;
use crate::perm::{Perm, IDENTITY};
use crate::triangulation::{Gluing, Triangulation, VertexKind};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TableJson {
    pub tetrahedra: Vec<Vec<Option<(usize, String)>>>,
    #[serde(default)]
    pub vertices: Vec<VertexJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VertexJson {
    pub id: usize,
    pub kind: VertexKind,
}

type RawTable = Vec<[Option<Gluing>; 4]>;

fn assemble(raw: RawTable, kinds: &[(usize, VertexKind)]) -> Result<Triangulation, TriError> {
    let mut tets = Vec::with_capacity(raw.len());
    for (t, row) in raw.iter().enumerate() {
        let mut out = [Gluing { tet: 0, perm: IDENTITY }; 4];
        for f in 0..4 {
            out[f] = row[f].ok_or(TriError::Dangling { tet: t, face: f as u8 })?;
        }
        tets.push(out);
    }
    Triangulation::with_class_kinds(tets, kinds)
}

pub fn parse_table(text: &str) -> Result<Triangulation, TriError> {
    let mut rows: BTreeMap<usize, [Option<Gluing>; 4]> = BTreeMap::new();
    let mut kinds = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| TriError::Parse(format!("line {}: {msg}", lineno + 1));
        let (head, body) = line.split_once(':').ok_or_else(|| err("missing `:`"))?;
        let mut head = head.split_whitespace();
        let keyword = head.next().ok_or_else(|| err("empty header"))?;
        let index: usize = head
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err("missing index"))?;
        match keyword {
            "tet" => {
                let parts: Vec<&str> = body.split('|').map(str::trim).collect();
                if parts.len() != 4 {
                    return Err(err("expected four gluings"));
                }
                let mut row = [None; 4];
                for (f, part) in parts.iter().enumerate() {
                    if *part == "-" {
                        continue;
                    }
                    let mut it = part.split_whitespace();
                    let target: usize = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad target"))?;
                    let perm: Perm = it.next().ok_or_else(|| err("missing permutation"))?.parse()?;
                    if it.next().is_some() {
                        return Err(err("trailing tokens"));
                    }
                    row[f] = Some(Gluing { tet: target, perm });
                }
                if rows.insert(index, row).is_some() {
                    return Err(err("duplicate tetrahedron"));
                }
            }
            "vertex" => {
                let kind = match body.trim() {
                    "ideal" => VertexKind::Ideal,
                    "material" => VertexKind::Material,
                    _ => return Err(err("vertex kind must be ideal or material")),
                };
                kinds.push((index, kind));
            }
            _ => return Err(err("unknown keyword")),
        }
    }
    let n = rows.len();
    if rows.keys().enumerate().any(|(i, &k)| i != k) {
        return Err(TriError::Parse("tetrahedra must be numbered 0..n".into()));
    }
    let raw: RawTable = rows.into_values().collect();
    debug_assert_eq!(raw.len(), n);
    assemble(raw, &kinds)
}

pub fn write_table(t: &Triangulation) -> String {
    let mut out = String::new();
    for (i, row) in t.gluings().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|g| format!("{} {}", g.tet, g.perm)).collect();
        writeln!(out, "tet {i}: {}", cells.join(" | ")).unwrap();
    }
    for v in t.vertices() {
        let kind = match v.kind {
            VertexKind::Ideal => "ideal",
            VertexKind::Material => "material",
        };
        writeln!(out, "vertex {}: {kind}", v.id).unwrap();
    }
    out
}

pub fn to_json(t: &Triangulation) -> TableJson {
    TableJson {
        tetrahedra: t
            .gluings()
            .iter()
            .map(|row| row.iter().map(|g| Some((g.tet, g.perm.to_string()))).collect())
            .collect(),
        vertices: t.vertices().iter().map(|v| VertexJson { id: v.id, kind: v.kind }).collect(),
    }
}

pub fn from_json(table: &TableJson) -> Result<Triangulation, TriError> {
    let mut raw = Vec::with_capacity(table.tetrahedra.len());
    for (t, row) in table.tetrahedra.iter().enumerate() {
        if row.len() != 4 {
            return Err(TriError::Parse(format!("tetrahedron {t} needs four gluings")));
        }
        let mut out = [None; 4];
        for (f, cell) in row.iter().enumerate() {
            if let Some((target, perm)) = cell {
                out[f] = Some(Gluing { tet: *target, perm: perm.parse()? });
            }
        }
        raw.push(out);
    }
    let kinds: Vec<_> = table.vertices.iter().map(|v| (v.id, v.kind)).collect();
    assemble(raw, &kinds)
}

/// Parses either format, choosing JSON when the text starts with `{`.
pub fn parse_any(text: &str) -> Result<Triangulation, TriError> {
    if text.trim_start().starts_with('{') {
        let table: TableJson =
            serde_json::from_str(text).map_err(|e| TriError::Parse(e.to_string()))?;
        from_json(&table)
    } else {
        parse_table(text)
    }
}
