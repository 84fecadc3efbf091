//! Text file format for stored posterior draws.
//!
//! Header lines start with `#`:
//!
//! ```text
//! # dgfc-draws 1
//! # model factor
//! # dims <T> <n> <k> <latent rows>
//! # seed <seed>
//! # var_moves <proposals> <accepted>
//! # variable <index> <kind> <name>
//! # levels <index> <v1>,<v2>,...
//! chain,iteration,G[0,0],...
//! ```
//!
//! followed by one comma-separated record per draw holding chain,
//! iteration, G, Σ, Λ (all row-major), v, Φ, δ, D0, η, x and the margin
//! heights of each variable. Numbers use the shortest representation that
//! parses back to the same f64.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::chain::{ChainDiagnostics, LatentState, ModelKind, PosteriorDraw, PosteriorDraws};
use crate::error::{DgfcError, Result};
use crate::linalg::{Matrix, Vector};
use crate::margins::StepCdf;
use crate::stationary::{DataKind, DgfcParams};

const MAGIC: &str = "# dgfc-draws 1";

fn push_matrix(line: &mut String, m: &Matrix) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let _ = write!(line, ",{}", m[(r, c)]);
        }
    }
}

fn push_slice(line: &mut String, v: &[f64]) {
    for x in v {
        let _ = write!(line, ",{x}");
    }
}

fn column_names(n: usize, k: usize, rows: usize, levels: &[Vec<f64>]) -> String {
    let mut cols = vec!["chain".to_string(), "iteration".to_string()];
    let mut mat = |name: &str, r: usize, c: usize| {
        for a in 0..r {
            for b in 0..c {
                cols.push(format!("{name}[{a};{b}]"));
            }
        }
    };
    mat("G", k, k);
    mat("Sigma", k, k);
    mat("Lambda", n, k);
    mat("v", n, 1);
    mat("Phi", n, k);
    mat("delta", k, 1);
    mat("D0", n, 1);
    mat("eta", rows, k);
    mat("x", rows, n);
    for (i, lv) in levels.iter().enumerate() {
        mat(&format!("F{i}"), lv.len(), 1);
    }
    cols.join(",")
}

pub fn write_draws(path: &Path, draws: &PosteriorDraws) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_draws_to(&mut w, draws)?;
    w.flush()?;
    Ok(())
}

pub fn write_draws_to<W: Write>(w: &mut W, draws: &PosteriorDraws) -> Result<()> {
    let n = draws.n();
    let (k, rows) = draws
        .draws
        .first()
        .map_or((0, 0), |d| (d.params.k(), d.latent.x.nrows()));
    let levels: Vec<Vec<f64>> = match draws.draws.first() {
        Some(d) => d.margins.iter().map(|m| m.locations().to_vec()).collect(),
        None => vec![Vec::new(); n],
    };
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "# model {}", draws.model.as_str())?;
    writeln!(w, "# dims {} {} {} {}", draws.t_len, n, k, rows)?;
    writeln!(w, "# seed {}", draws.seed)?;
    writeln!(
        w,
        "# var_moves {} {}",
        draws.diagnostics.var_proposals, draws.diagnostics.var_accepted
    )?;
    for i in 0..n {
        if draws.names[i].contains('\n') {
            return Err(DgfcError::Validation("variable names cannot contain newlines".into()));
        }
        writeln!(w, "# variable {} {} {}", i, draws.kinds[i].as_str(), draws.names[i])?;
    }
    for (i, lv) in levels.iter().enumerate() {
        let joined: Vec<String> = lv.iter().map(|x| format!("{x}")).collect();
        writeln!(w, "# levels {} {}", i, joined.join(","))?;
    }
    writeln!(w, "{}", column_names(n, k, rows, &levels))?;
    for d in &draws.draws {
        let mut line = format!("{},{}", d.chain, d.iteration);
        let p = &d.params;
        push_matrix(&mut line, &p.g);
        push_matrix(&mut line, &p.sigma);
        push_matrix(&mut line, &p.lambda);
        push_slice(&mut line, p.v.as_slice());
        push_matrix(&mut line, &p.phi);
        push_slice(&mut line, p.delta.as_slice());
        push_slice(&mut line, d.d0.as_slice());
        push_matrix(&mut line, &d.latent.eta);
        push_matrix(&mut line, &d.latent.x);
        for m in &d.margins {
            push_slice(&mut line, m.heights());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn parse_err(row: usize, col: usize, message: impl Into<String>) -> DgfcError {
    DgfcError::Parse {
        row,
        col,
        message: message.into(),
    }
}

fn header_value<'a>(line: &'a str, key: &str, row: usize) -> Result<&'a str> {
    line.strip_prefix("# ")
        .and_then(|s| s.strip_prefix(key))
        .and_then(|s| s.strip_prefix(' '))
        .ok_or_else(|| parse_err(row, 0, format!("expected header `{key}`")))
}

fn parse_usize(s: &str, row: usize) -> Result<usize> {
    s.trim().parse().map_err(|_| parse_err(row, 0, format!("bad integer `{s}`")))
}

struct Cursor<'a> {
    fields: std::str::Split<'a, char>,
    row: usize,
    col: usize,
}

impl Cursor<'_> {
    fn next(&mut self) -> Result<f64> {
        self.col += 1;
        let f = self
            .fields
            .next()
            .ok_or_else(|| parse_err(self.row, self.col, "record too short"))?;
        f.parse()
            .map_err(|_| parse_err(self.row, self.col, format!("not a number: `{f}`")))
    }

    fn matrix(&mut self, r: usize, c: usize) -> Result<Matrix> {
        let mut m = Matrix::zeros(r, c);
        for a in 0..r {
            for b in 0..c {
                m[(a, b)] = self.next()?;
            }
        }
        Ok(m)
    }

    fn vector(&mut self, len: usize) -> Result<Vector> {
        let mut v = Vector::zeros(len);
        for a in 0..len {
            v[a] = self.next()?;
        }
        Ok(v)
    }
}

pub fn read_draws(path: &Path) -> Result<PosteriorDraws> {
    let file = File::open(path)?;
    read_draws_from(BufReader::new(file))
}

pub fn read_draws_from<R: BufRead>(reader: R) -> Result<PosteriorDraws> {
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().enumerate().map(|(r, l)| (r + 1, l.as_str()));
    let mut next = |what: &str| {
        it.next()
            .ok_or_else(|| parse_err(lines.len(), 0, format!("missing {what}")))
    };
    let (row, magic) = next("magic line")?;
    if magic != MAGIC {
        return Err(parse_err(row, 0, "not a draws file"));
    }
    let (row, line) = next("model")?;
    let model = ModelKind::parse(header_value(line, "model", row)?)
        .ok_or_else(|| parse_err(row, 0, "unknown model"))?;
    let (row, line) = next("dims")?;
    let dims: Vec<usize> = header_value(line, "dims", row)?
        .split(' ')
        .map(|s| parse_usize(s, row))
        .collect::<Result<_>>()?;
    if dims.len() != 4 {
        return Err(parse_err(row, 0, "dims needs four entries"));
    }
    let (t_len, n, k, rows) = (dims[0], dims[1], dims[2], dims[3]);
    let (row, line) = next("seed")?;
    let seed: u64 = header_value(line, "seed", row)?
        .parse()
        .map_err(|_| parse_err(row, 0, "bad seed"))?;
    let (row, line) = next("var_moves")?;
    let moves: Vec<usize> = header_value(line, "var_moves", row)?
        .split(' ')
        .map(|s| parse_usize(s, row))
        .collect::<Result<_>>()?;
    if moves.len() != 2 {
        return Err(parse_err(row, 0, "var_moves needs two entries"));
    }
    let mut names = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for i in 0..n {
        let (row, line) = next("variable")?;
        let rest = header_value(line, "variable", row)?;
        let mut parts = rest.splitn(3, ' ');
        let idx = parse_usize(parts.next().unwrap_or(""), row)?;
        let kind = parts
            .next()
            .and_then(DataKind::parse)
            .ok_or_else(|| parse_err(row, 0, "bad data kind"))?;
        if idx != i {
            return Err(parse_err(row, 0, "variables out of order"));
        }
        kinds.push(kind);
        names.push(parts.next().unwrap_or("").to_string());
    }
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let (row, line) = next("levels")?;
        let rest = header_value(line, "levels", row)?;
        let (idx, vals) = rest.split_once(' ').unwrap_or((rest, ""));
        if parse_usize(idx, row)? != i {
            return Err(parse_err(row, 0, "levels out of order"));
        }
        let lv = if vals.is_empty() {
            Vec::new()
        } else {
            vals.split(',')
                .map(|s| s.parse().map_err(|_| parse_err(row, 0, format!("bad level `{s}`"))))
                .collect::<Result<_>>()?
        };
        levels.push(lv);
    }
    let _ = next("column names")?;
    let mut draws = Vec::new();
    for (row, line) in it {
        if line.is_empty() {
            continue;
        }
        let mut split = line.split(',');
        let chain = parse_usize(split.next().unwrap_or(""), row)?;
        let iteration = parse_usize(split.next().unwrap_or(""), row)?;
        let mut cur = Cursor {
            fields: split,
            row,
            col: 2,
        };
        let g = cur.matrix(k, k)?;
        let sigma = cur.matrix(k, k)?;
        let lambda = cur.matrix(n, k)?;
        let v = cur.vector(n)?;
        let phi = cur.matrix(n, k)?;
        let delta = cur.vector(k)?;
        let d0 = cur.vector(n)?;
        let eta = cur.matrix(rows, k)?;
        let x = cur.matrix(rows, n)?;
        let mut margins = Vec::with_capacity(n);
        for lv in &levels {
            let heights: Vec<f64> = (0..lv.len()).map(|_| cur.next()).collect::<Result<_>>()?;
            margins.push(StepCdf::new(lv.clone(), heights)?);
        }
        if cur.fields.next().is_some() {
            return Err(parse_err(row, cur.col + 1, "record too long"));
        }
        draws.push(PosteriorDraw {
            params: DgfcParams::new(g, sigma, lambda, v, phi, delta),
            latent: LatentState { x, eta },
            d0,
            margins,
            chain,
            iteration,
        });
    }
    Ok(PosteriorDraws {
        draws,
        names,
        kinds,
        model,
        seed,
        t_len,
        diagnostics: ChainDiagnostics {
            var_proposals: moves[0],
            var_accepted: moves[1],
        },
    })
}
