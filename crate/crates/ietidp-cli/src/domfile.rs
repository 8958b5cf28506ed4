//! Line-oriented text format for multi-patch domains.
//!
//! One record per line, `#` starts a comment:
//!
//! ```text
//! patch <id> degree <p_u> <p_v> knots_u <k...> knots_v <k...> weights <w...> points <x y ...>
//! interface <k> <side> <l> <side> <normal|reversed>
//! dirichlet <k> <side>
//! ```
//!
//! Control points and weights are lexicographic with `u` fastest; sides are
//! `umin|umax|vmin|vmax`. Numbers use shortest round-trip decimal printing,
//! so serialize-then-parse reproduces every value bit for bit.

use std::fmt::Write as _;

use ietidp_core::geometry::{GeometryError, Interface, MultiPatchDomain, NurbsPatchMap, SideId};
use ietidp_core::splines::{KnotVector, SplineError, TensorSplineSpace};

#[derive(Debug, thiserror::Error)]
pub enum DomFileError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    BadKnots {
        line: usize,
        #[source]
        source: SplineError,
    },
    #[error("line {line}: {source}")]
    BadPatch {
        line: usize,
        #[source]
        source: GeometryError,
    },
    #[error("line {line}, column {col}: interface references unknown patch {patch}")]
    DanglingPatch {
        line: usize,
        col: usize,
        patch: usize,
    },
    #[error("patch ids must be 0..{expected}, got {got} patches with id range issues")]
    PatchIds { expected: usize, got: usize },
    #[error("domain is inconsistent: {0}")]
    Inconsistent(#[from] GeometryError),
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &line[s..i],
                    col: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        let end = line.find('#').unwrap_or(line.len());
        tokens.push(Token {
            text: line[s..end].trim_end(),
            col: s + 1,
        });
    }
    tokens
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&Token<'a>, DomFileError> {
        let token = self.tokens.get(self.pos).ok_or_else(|| DomFileError::Syntax {
            line: self.line,
            col: self.tokens.last().map_or(1, |t| t.col + t.text.len()),
            message: format!("expected {what}"),
        })?;
        self.pos += 1;
        Ok(token)
    }

    fn usize(&mut self, what: &str) -> Result<usize, DomFileError> {
        let line = self.line;
        let t = self.next(what)?;
        t.text.parse().map_err(|_| DomFileError::Syntax {
            line,
            col: t.col,
            message: format!("expected {what}, found `{}`", t.text),
        })
    }

    fn f64(&mut self, what: &str) -> Result<f64, DomFileError> {
        let line = self.line;
        let t = self.next(what)?;
        t.text.parse().map_err(|_| DomFileError::Syntax {
            line,
            col: t.col,
            message: format!("malformed number `{}` for {what}", t.text),
        })
    }

    fn keyword(&mut self, word: &str) -> Result<(), DomFileError> {
        let line = self.line;
        let t = self.next(&format!("`{word}`"))?;
        if t.text != word {
            return Err(DomFileError::Syntax {
                line,
                col: t.col,
                message: format!("expected `{word}`, found `{}`", t.text),
            });
        }
        Ok(())
    }

    fn side(&mut self) -> Result<SideId, DomFileError> {
        let line = self.line;
        let t = self.next("side (umin|umax|vmin|vmax)")?;
        SideId::parse(t.text).ok_or_else(|| DomFileError::Syntax {
            line,
            col: t.col,
            message: format!("unknown side `{}`", t.text),
        })
    }

    /// Numbers until the next keyword or end of line.
    fn number_run(&mut self) -> Result<Vec<f64>, DomFileError> {
        let mut out = Vec::new();
        while let Some(t) = self.tokens.get(self.pos) {
            if t.text.parse::<f64>().is_err() {
                break;
            }
            out.push(t.text.parse().unwrap());
            self.pos += 1;
        }
        if out.is_empty() {
            let col = self
                .tokens
                .get(self.pos)
                .map_or_else(|| self.tokens.last().map_or(1, |t| t.col + t.text.len()), |t| t.col);
            return Err(DomFileError::Syntax {
                line: self.line,
                col,
                message: "expected at least one number".into(),
            });
        }
        Ok(out)
    }

    fn finished(&self) -> bool {
        self.pos >= self.tokens.len()
    }
}

/// Parses a domain document.
pub fn parse_domain(text: &str) -> Result<MultiPatchDomain, DomFileError> {
    let mut patches: Vec<(usize, NurbsPatchMap, usize)> = Vec::new(); // (id, map, line)
    let mut interfaces: Vec<Interface> = Vec::new();
    let mut interface_lines: Vec<(usize, usize)> = Vec::new();
    let mut dirichlet: Vec<(usize, SideId)> = Vec::new();
    let mut dirichlet_refs: Vec<(usize, usize)> = Vec::new();

    for (line_idx, raw) in text.lines().enumerate() {
        let line = line_idx + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let mut cur = Cursor { tokens, pos: 0, line };
        let head = cur.next("record type")?;
        match head.text {
            "patch" => {
                let id = cur.usize("patch id")?;
                cur.keyword("degree")?;
                let p_u = cur.usize("degree p_u")?;
                let p_v = cur.usize("degree p_v")?;
                cur.keyword("knots_u")?;
                let knots_u = cur.number_run()?;
                cur.keyword("knots_v")?;
                let knots_v = cur.number_run()?;
                cur.keyword("weights")?;
                let weights = cur.number_run()?;
                cur.keyword("points")?;
                let coords = cur.number_run()?;
                if coords.len() % 2 != 0 {
                    return Err(DomFileError::Syntax {
                        line,
                        col: 1,
                        message: format!(
                            "points needs an even number of coordinates, got {}",
                            coords.len()
                        ),
                    });
                }
                let kv_u = KnotVector::new(p_u, knots_u)
                    .map_err(|source| DomFileError::BadKnots { line, source })?;
                let kv_v = KnotVector::new(p_v, knots_v)
                    .map_err(|source| DomFileError::BadKnots { line, source })?;
                let points: Vec<[f64; 2]> =
                    coords.chunks(2).map(|c| [c[0], c[1]]).collect();
                let map = NurbsPatchMap::new(TensorSplineSpace::new(kv_u, kv_v), points, weights)
                    .map_err(|source| DomFileError::BadPatch { line, source })?;
                patches.push((id, map, line));
            }
            "interface" => {
                let col_a = cur.tokens.get(cur.pos).map_or(1, |t| t.col);
                let a = cur.usize("patch id")?;
                let side_a = cur.side()?;
                let col_b = cur.tokens.get(cur.pos).map_or(1, |t| t.col);
                let b = cur.usize("patch id")?;
                let side_b = cur.side()?;
                let orient = cur.next("orientation (normal|reversed)")?;
                let reversed = match orient.text {
                    "normal" => false,
                    "reversed" => true,
                    other => {
                        return Err(DomFileError::Syntax {
                            line,
                            col: orient.col,
                            message: format!("unknown orientation `{other}`"),
                        })
                    }
                };
                interfaces.push(Interface {
                    patch_a: a,
                    side_a,
                    patch_b: b,
                    side_b,
                    reversed,
                });
                interface_lines.push((line, col_a.max(col_b)));
            }
            "dirichlet" => {
                let col = cur.tokens.get(cur.pos).map_or(1, |t| t.col);
                let k = cur.usize("patch id")?;
                let side = cur.side()?;
                dirichlet.push((k, side));
                dirichlet_refs.push((line, col));
            }
            other => {
                return Err(DomFileError::Syntax {
                    line,
                    col: head.col,
                    message: format!("unknown record `{other}`"),
                })
            }
        }
        if !cur.finished() {
            let t = &cur.tokens[cur.pos];
            return Err(DomFileError::Syntax {
                line,
                col: t.col,
                message: format!("unexpected trailing token `{}`", t.text),
            });
        }
    }

    // patch ids must be 0..n-1
    let n = patches.len();
    patches.sort_by_key(|(id, _, _)| *id);
    for (want, (id, _, line)) in patches.iter().enumerate() {
        if *id != want {
            return Err(DomFileError::Syntax {
                line: *line,
                col: 7,
                message: format!("patch ids must be contiguous from 0; expected {want}, found {id}"),
            });
        }
    }
    let maps: Vec<NurbsPatchMap> = patches.into_iter().map(|(_, m, _)| m).collect();

    for (itf, &(line, col)) in interfaces.iter().zip(&interface_lines) {
        for patch in [itf.patch_a, itf.patch_b] {
            if patch >= n {
                return Err(DomFileError::DanglingPatch { line, col, patch });
            }
        }
    }
    for (&(k, _), &(line, col)) in dirichlet.iter().zip(&dirichlet_refs) {
        if k >= n {
            return Err(DomFileError::DanglingPatch { line, col, patch: k });
        }
    }

    Ok(MultiPatchDomain::assemble(maps, interfaces, dirichlet)?)
}

/// Serializes a domain in canonical form (patches, interfaces, dirichlet
/// records in order; shortest round-trip decimals).
pub fn serialize_domain(domain: &MultiPatchDomain) -> String {
    let mut out = String::new();
    for (id, map) in domain.patches.iter().enumerate() {
        let space = map.space();
        write!(
            out,
            "patch {id} degree {} {} knots_u",
            space.kv_u().degree(),
            space.kv_v().degree()
        )
        .unwrap();
        for k in space.kv_u().knots() {
            write!(out, " {k}").unwrap();
        }
        out.push_str(" knots_v");
        for k in space.kv_v().knots() {
            write!(out, " {k}").unwrap();
        }
        out.push_str(" weights");
        for w in map.weights() {
            write!(out, " {w}").unwrap();
        }
        out.push_str(" points");
        for p in map.control_points() {
            write!(out, " {} {}", p[0], p[1]).unwrap();
        }
        out.push('\n');
    }
    for itf in &domain.interfaces {
        writeln!(
            out,
            "interface {} {} {} {} {}",
            itf.patch_a,
            itf.side_a.as_str(),
            itf.patch_b,
            itf.side_b.as_str(),
            if itf.reversed { "reversed" } else { "normal" }
        )
        .unwrap();
    }
    for &(k, side) in &domain.dirichlet {
        writeln!(out, "dirichlet {k} {}", side.as_str()).unwrap();
    }
    out
}
