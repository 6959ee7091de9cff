//! Symbolic rolling-horizon MILP and its LP-format text encoding.
//!
//! Open bins are laid side by side along x, so bin `j` occupies
//! `[(j-1)·L, j·L)` in global coordinates. The objective is written in
//! bin-local coordinates by subtracting the bin offset through `p_ij`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bin::{BinState, RobotConfig};
use crate::error::{Error, Result};
use crate::geometry::{BoxDims, Orientation};
use crate::opack::Weights;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VarKind {
    Continuous { lo: f64, hi: f64 },
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintTag {
    Geometric,
    Stability,
    Cep,
    Fixing,
}

impl ConstraintTag {
    fn prefix(self) -> &'static str {
        match self {
            ConstraintTag::Geometric => "geo",
            ConstraintTag::Stability => "stab",
            ConstraintTag::Cep => "cep",
            ConstraintTag::Fixing => "fix",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: ConstraintTag,
}

/// Big-M constants. `x_local`/`y` are the per-bin extents used by the wall
/// contact rows; `x_global` spans all open bins and bounds every other
/// x-axis implication.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigM {
    pub x_local: f64,
    pub x_global: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    pub big_m: BigM,
    /// Model box index of each look-ahead box, in conveyor order.
    pub lookahead: Vec<usize>,
    /// Number of committed boxes (model indices `1..=committed`).
    pub committed: usize,
    pub open_bins: usize,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl MilpModel {
    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn constraints_tagged(&self, tag: ConstraintTag) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.tag == tag)
    }

    /// Every constraint and objective term refers to a declared variable and
    /// the objective is non-empty.
    pub fn validate(&self) -> Result<()> {
        if self.objective.is_empty() {
            return Err(Error::Model("objective has no terms".into()));
        }
        self.check_references()
    }

    fn check_references(&self) -> Result<()> {
        let n = self.variables.len();
        let bad = self
            .constraints
            .iter()
            .flat_map(|c| c.terms.iter().map(move |t| (c.name.as_str(), t.0)))
            .chain(self.objective.iter().map(|t| ("objective", t.0)))
            .find(|(_, v)| *v >= n);
        if let Some((row, v)) = bad {
            return Err(Error::Model(format!("{row} references undeclared variable #{v}")));
        }
        Ok(())
    }

    pub fn to_lp_string(&self) -> Result<String> {
        self.validate()?;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\\ rolling-horizon packing model: {} look-ahead, {} committed, {} open bins",
            self.lookahead.len(),
            self.committed,
            self.open_bins
        );
        out.push_str("Minimize\n");
        write_row(&mut out, "obj", &self.objective, &self.variables);
        out.push('\n');
        out.push_str("Subject To\n");
        for c in &self.constraints {
            write_row(&mut out, &c.name, &c.terms, &self.variables);
            let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            if let VarKind::Continuous { lo, hi } = v.kind {
                let _ = writeln!(out, " {} <= {} <= {}", fmt_num(lo), v.name, fmt_num(hi));
            }
        }
        out.push_str("Binaries\n");
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = writeln!(out, " {}", v.name);
        }
        out.push_str("End\n");
        Ok(out)
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

const TERMS_PER_LINE: usize = 8;

fn write_row(out: &mut String, name: &str, terms: &[(usize, f64)], vars: &[Variable]) {
    let _ = write!(out, " {name}:");
    for (k, (v, c)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", fmt_num(c.abs()), vars[*v].name);
    }
}

/// Writes `model` in CPLEX LP format.
pub fn export_model(model: &MilpModel, path: &Path) -> Result<()> {
    let text = model.to_lp_string()?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// An LP-format file read back into rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedLp {
    pub objective: Vec<(String, f64)>,
    pub constraints: Vec<(String, Vec<(String, f64)>, Sense, f64)>,
    pub bounds: Vec<(String, f64, f64)>,
    pub binaries: Vec<String>,
}

impl ParsedLp {
    pub fn variable_count(&self) -> usize {
        self.bounds.len() + self.binaries.len()
    }
}

/// Parses the LP-format subset emitted by [`MilpModel::to_lp_string`].
pub fn parse_lp(text: &str) -> Result<ParsedLp> {
    #[derive(PartialEq)]
    enum Section {
        Start,
        Objective,
        Rows,
        Bounds,
        Binaries,
        End,
    }
    let mut section = Section::Start;
    let mut parsed = ParsedLp::default();
    // logical rows are joined across continuation lines
    let mut pending: Option<String> = None;
    let mut rows: Vec<(bool, String)> = Vec::new();
    let flush = |pending: &mut Option<String>, rows: &mut Vec<(bool, String)>, objective: bool| {
        if let Some(r) = pending.take() {
            rows.push((objective, r));
        }
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        let next = match line.to_ascii_lowercase().as_str() {
            "minimize" => Some(Section::Objective),
            "subject to" => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" => Some(Section::Binaries),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(next) = next {
            flush(&mut pending, &mut rows, section == Section::Objective);
            section = next;
            continue;
        }
        match section {
            Section::Objective | Section::Rows => {
                if line.contains(':') {
                    flush(&mut pending, &mut rows, section == Section::Objective);
                    pending = Some(line.to_string());
                } else {
                    let p = pending
                        .as_mut()
                        .ok_or_else(|| Error::Parse(format!("line {}: continuation without a row", lineno + 1)))?;
                    p.push(' ');
                    p.push_str(line);
                }
            }
            Section::Bounds => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                let [lo, "<=", name, "<=", hi] = parts[..] else {
                    return Err(Error::Parse(format!("line {}: malformed bound `{line}`", lineno + 1)));
                };
                let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
                parsed.bounds.push((name.to_string(), num(lo)?, num(hi)?));
            }
            Section::Binaries => parsed.binaries.extend(line.split_whitespace().map(str::to_string)),
            Section::Start | Section::End => {
                return Err(Error::Parse(format!("line {}: content outside a section", lineno + 1)));
            }
        }
    }
    flush(&mut pending, &mut rows, section == Section::Objective);
    for (objective, row) in rows {
        let (name, body) = row.split_once(':').expect("rows carry a name");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let sense_at = tokens.iter().position(|t| matches!(*t, "<=" | ">=" | "="));
        let (lhs, tail) = match sense_at {
            Some(i) => (&tokens[..i], Some(&tokens[i..])),
            None => (&tokens[..], None),
        };
        let terms = parse_terms(lhs).map_err(|e| Error::Parse(format!("row {name}: {e}")))?;
        if objective {
            parsed.objective = terms;
            continue;
        }
        let Some([sense, rhs]) = tail.map(|t| <[&str; 2]>::try_from(t).ok()).flatten() else {
            return Err(Error::Parse(format!("row {name}: missing sense or right-hand side")));
        };
        let sense = match sense {
            "<=" => Sense::Le,
            ">=" => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = rhs.parse::<f64>().map_err(|e| Error::Parse(format!("row {name}: {e}")))?;
        parsed.constraints.push((name.trim().to_string(), terms, sense, rhs));
    }
    Ok(parsed)
}

fn parse_terms(tokens: &[&str]) -> std::result::Result<Vec<(String, f64)>, String> {
    let mut out = Vec::new();
    let mut it = tokens.iter();
    while let Some(sign) = it.next() {
        let sign = match *sign {
            "+" => 1.0,
            "-" => -1.0,
            other => return Err(format!("expected sign, found `{other}`")),
        };
        let coef: f64 = it.next().ok_or("dangling sign")?.parse().map_err(|e| format!("{e}"))?;
        let name = it.next().ok_or("missing variable name")?;
        out.push((name.to_string(), sign * coef));
    }
    Ok(out)
}

const AXES: [char; 3] = ['x', 'y', 'z'];
const SIDES: [char; 3] = ['l', 'b', 'h'];
/// Lateral contact directions: x-negative, y-negative, x-positive, y-positive.
const WALLS: [usize; 4] = [1, 2, 3, 4];

struct Builder {
    model: MilpModel,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind) -> usize {
        let id = self.model.variables.len();
        self.model.index.insert(name.clone(), id);
        self.model.variables.push(Variable { name, kind });
        id
    }

    fn v(&self, name: &str) -> usize {
        self.model.index[name]
    }

    fn row(&mut self, tag: ConstraintTag, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        let name = format!("{}_{}", tag.prefix(), self.model.constraints.len() + 1);
        self.model.constraints.push(Constraint { name, terms, sense, rhs, tag });
    }
}

struct ModelBox {
    dims: BoxDims,
    fixed: Option<([u32; 3], Orientation, usize)>,
}

/// Builds the joint placement model for `window` on top of the committed bins.
pub fn build_milp(committed: &[BinState], window: &[BoxDims], cfg: &RobotConfig, w: &Weights) -> Result<MilpModel> {
    if window.is_empty() {
        return Err(Error::Model("look-ahead is empty".into()));
    }
    let Some(first) = committed.first() else {
        return Err(Error::Model("no open bins".into()));
    };
    let bin = first.dims;
    if committed.iter().any(|b| b.extents() != first.extents()) {
        return Err(Error::Model("open bins must share dimensions".into()));
    }
    if let Some(bad) = window.iter().find(|b| !b.packable_in(&bin)) {
        return Err(Error::Model(format!(
            "box {} ({}x{}x{}) exceeds the smallest bin side {}",
            bad.id,
            bad.l,
            bad.b,
            bad.h,
            bin.min_side()
        )));
    }
    let nb = committed.len();
    let (l, b, h) = (bin.l as f64, bin.b as f64, bin.h as f64);
    let big_m = BigM { x_local: l, x_global: l * nb as f64, y: b, z: h };
    let mut bins_sorted: Vec<&BinState> = committed.iter().collect();
    bins_sorted.sort_by_key(|s| s.index);

    let mut boxes: Vec<ModelBox> = Vec::new();
    for (j, s) in bins_sorted.iter().enumerate() {
        for p in s.placements() {
            let global = [p.corner[0] + j as u32 * bin.l, p.corner[1], p.corner[2]];
            boxes.push(ModelBox { dims: p.item, fixed: Some((global, p.orientation, j + 1)) });
        }
    }
    let n_committed = boxes.len();
    boxes.extend(window.iter().map(|d| ModelBox { dims: *d, fixed: None }));
    let n = boxes.len();
    let is_look = |i: usize| i >= n_committed;

    let mut bld = Builder {
        model: MilpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            big_m,
            lookahead: (n_committed + 1..=n).collect(),
            committed: n_committed,
            open_bins: nb,
            index: HashMap::new(),
        },
    };
    use ConstraintTag::*;
    use Sense::*;

    // declarations
    for i in 1..=n {
        for (a, hi) in AXES.iter().zip([big_m.x_global, b, h]) {
            bld.var(format!("{a}_{i}"), VarKind::Continuous { lo: 0.0, hi });
            bld.var(format!("{a}b_{i}"), VarKind::Continuous { lo: 0.0, hi });
        }
        for j in 1..=nb {
            bld.var(format!("p_{i}_{j}"), VarKind::Binary);
        }
    }
    for j in 1..=nb {
        bld.var(format!("u_{j}"), VarKind::Binary);
    }
    for i in 1..=n {
        for a in AXES {
            for s in SIDES {
                bld.var(format!("r_{i}_{a}{s}"), VarKind::Binary);
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |k| (i, k)))
        .filter(|(i, k)| is_look(i - 1) || is_look(k - 1))
        .collect();
    for (i, k) in &pairs {
        for a in AXES {
            bld.var(format!("lam_{a}_{i}_{k}"), VarKind::Binary);
            bld.var(format!("lam_{a}_{k}_{i}"), VarKind::Binary);
        }
    }
    for i in (n_committed + 1)..=n {
        if n > 1 {
            bld.var(format!("phi_{i}"), VarKind::Binary);
            for v in 1..=4 {
                bld.var(format!("sv_{i}_{v}"), VarKind::Binary);
            }
            for k in (1..=n).filter(|k| *k != i) {
                for v in 1..=4 {
                    bld.var(format!("sig_{i}_{k}_{v}"), VarKind::Binary);
                }
            }
        }
        if cfg.require_cep {
            for e in WALLS {
                bld.var(format!("dw_{i}_{e}"), VarKind::Binary);
                bld.var(format!("cd_{i}_{e}"), VarKind::Binary);
            }
            for k in (1..=n).filter(|k| *k != i) {
                for e in WALLS {
                    bld.var(format!("d_{i}_{k}_{e}"), VarKind::Binary);
                }
            }
        }
    }

    // objective over look-ahead boxes, in bin-local coordinates
    for i in (n_committed + 1)..=n {
        let mut terms = vec![
            (bld.v(&format!("x_{i}")), w.w1),
            (bld.v(&format!("y_{i}")), w.w1),
            (bld.v(&format!("zb_{i}")), w.w2),
        ];
        for j in 1..=nb {
            terms.push((bld.v(&format!("p_{i}_{j}")), w.w3 * j as f64 - w.w1 * (j - 1) as f64 * l));
        }
        bld.model.objective.extend(terms.into_iter().filter(|(_, c)| *c != 0.0));
    }

    // geometric
    for (idx, mb) in boxes.iter().enumerate() {
        let i = idx + 1;
        let vx = |s: &str| format!("{s}_{i}");
        for j in 1..=nb {
            let t = vec![(bld.v(&format!("p_{i}_{j}")), 1.0), (bld.v(&format!("u_{j}")), -1.0)];
            bld.row(Geometric, t, Le, 0.0);
        }
        let t = (1..=nb).map(|j| (bld.v(&format!("p_{i}_{j}")), 1.0)).collect();
        bld.row(Geometric, t, Eq, 1.0);
        let mut t = vec![(bld.v(&vx("x")), 1.0)];
        t.extend((2..=nb).map(|j| (bld.v(&format!("p_{i}_{j}")), -((j - 1) as f64) * l)));
        bld.row(Geometric, t, Ge, 0.0);
        let mut t = vec![(bld.v(&vx("xb")), 1.0)];
        t.extend((1..=nb).map(|j| (bld.v(&format!("p_{i}_{j}")), -(j as f64) * l)));
        bld.row(Geometric, t, Le, 0.0);
        bld.row(Geometric, vec![(bld.v(&vx("yb")), 1.0)], Le, b);
        bld.row(Geometric, vec![(bld.v(&vx("zb")), 1.0)], Le, h);
        let sides = mb.dims.sides().map(|s| s as f64);
        for a in AXES {
            let mut t = vec![(bld.v(&format!("{a}b_{i}")), 1.0), (bld.v(&format!("{a}_{i}")), -1.0)];
            for (s, len) in SIDES.iter().zip(sides) {
                t.push((bld.v(&format!("r_{i}_{a}{s}")), -len));
            }
            bld.row(Geometric, t, Eq, 0.0);
        }
        for a in AXES {
            let t = SIDES.iter().map(|s| (bld.v(&format!("r_{i}_{a}{s}")), 1.0)).collect();
            bld.row(Geometric, t, Eq, 1.0);
        }
        for s in SIDES {
            let t = AXES.iter().map(|a| (bld.v(&format!("r_{i}_{a}{s}")), 1.0)).collect();
            bld.row(Geometric, t, Eq, 1.0);
        }
        if mb.fixed.is_none() {
            orientation_rows(&mut bld, i, &mb.dims, cfg);
        }
    }
    for (i, k) in &pairs {
        let mut sep = Vec::new();
        for (a, m) in AXES.iter().zip([big_m.x_global, big_m.y, big_m.z]) {
            for (p, q) in [(*i, *k), (*k, *i)] {
                // lam_a_p_q = 1  =>  q ends before p starts along a
                let lam = bld.v(&format!("lam_{a}_{p}_{q}"));
                let t = vec![(bld.v(&format!("{a}b_{q}")), 1.0), (bld.v(&format!("{a}_{p}")), -1.0), (lam, m)];
                bld.row(Geometric, t, Le, m);
                sep.push((lam, 1.0));
            }
        }
        bld.row(Geometric, sep, Ge, 1.0);
    }

    // vertical stability for look-ahead boxes
    let need = cfg.min_supported_vertices as f64;
    for i in (n_committed + 1)..=n {
        if n == 1 {
            bld.row(Stability, vec![(bld.v(&format!("z_{i}")), 1.0)], Le, 0.0);
            continue;
        }
        let phi = bld.v(&format!("phi_{i}"));
        bld.row(Stability, vec![(bld.v(&format!("z_{i}")), 1.0), (phi, h)], Le, h);
        let mut t: Vec<(usize, f64)> = (1..=4).map(|v| (bld.v(&format!("sv_{i}_{v}")), 1.0)).collect();
        t.push((phi, need));
        bld.row(Stability, t, Ge, need);
        for v in 1..=4 {
            let mut t = vec![(bld.v(&format!("sv_{i}_{v}")), 1.0)];
            t.extend((1..=n).filter(|k| *k != i).map(|k| (bld.v(&format!("sig_{i}_{k}_{v}")), -1.0)));
            bld.row(Stability, t, Le, 0.0);
        }
        for k in (1..=n).filter(|k| *k != i) {
            for v in 1..=4usize {
                let sig = bld.v(&format!("sig_{i}_{k}_{v}"));
                let (zi, zbk) = (bld.v(&format!("z_{i}")), bld.v(&format!("zb_{k}")));
                bld.row(Stability, vec![(zbk, 1.0), (zi, -1.0), (sig, h)], Le, h);
                bld.row(Stability, vec![(zi, 1.0), (zbk, -1.0), (sig, h)], Le, h);
                // vertex v: bit 0 picks x or x̄, bit 1 picks y or ȳ
                let vxn = if (v - 1) & 1 == 0 { format!("x_{i}") } else { format!("xb_{i}") };
                let vyn = if (v - 1) & 2 == 0 { format!("y_{i}") } else { format!("yb_{i}") };
                for (vert, a, m) in [(vxn, 'x', big_m.x_global), (vyn, 'y', big_m.y)] {
                    let vert = bld.v(&vert);
                    let (lo, hi) = (bld.v(&format!("{a}_{k}")), bld.v(&format!("{a}b_{k}")));
                    bld.row(Stability, vec![(lo, 1.0), (vert, -1.0), (sig, m)], Le, m);
                    bld.row(Stability, vec![(vert, 1.0), (hi, -1.0), (sig, m)], Le, m);
                }
                same_bin_rows(&mut bld, Stability, sig, i, k, nb);
            }
        }
    }

    // lateral contact (CEP)
    if cfg.require_cep {
        for i in (n_committed + 1)..=n {
            let offset = |bld: &Builder, sign: f64| -> Vec<(usize, f64)> {
                (2..=nb).map(|j| (bld.v(&format!("p_{i}_{j}")), sign * (j - 1) as f64 * l)).collect()
            };
            let dw: Vec<usize> = WALLS.iter().map(|e| bld.v(&format!("dw_{i}_{e}"))).collect();
            // local x = 0
            let mut t = vec![(bld.v(&format!("x_{i}")), 1.0), (dw[0], l)];
            t.extend(offset(&bld, -1.0));
            bld.row(Cep, t, Le, l);
            // local y = 0
            bld.row(Cep, vec![(bld.v(&format!("y_{i}")), 1.0), (dw[1], b)], Le, b);
            // local x̄ = L
            let mut t = vec![(bld.v(&format!("xb_{i}")), -1.0), (dw[2], l)];
            t.extend(offset(&bld, 1.0));
            bld.row(Cep, t, Le, 0.0);
            // ȳ = B
            bld.row(Cep, vec![(bld.v(&format!("yb_{i}")), -1.0), (dw[3], b)], Le, 0.0);

            for k in (1..=n).filter(|k| *k != i) {
                for e in WALLS {
                    let d = bld.v(&format!("d_{i}_{k}_{e}"));
                    let (axis, other, m_axis, m_other) = if e % 2 == 1 {
                        ('x', 'y', big_m.x_global, big_m.y)
                    } else {
                        ('y', 'x', big_m.y, big_m.x_global)
                    };
                    // negative side: i starts where k ends; positive side: i ends where k starts
                    let (mine, theirs) = if e <= 2 {
                        (format!("{axis}_{i}"), format!("{axis}b_{k}"))
                    } else {
                        (format!("{axis}b_{i}"), format!("{axis}_{k}"))
                    };
                    let (mine, theirs) = (bld.v(&mine), bld.v(&theirs));
                    bld.row(Cep, vec![(mine, 1.0), (theirs, -1.0), (d, m_axis)], Le, m_axis);
                    bld.row(Cep, vec![(theirs, 1.0), (mine, -1.0), (d, m_axis)], Le, m_axis);
                    // positive-length overlap on the other lateral axis and on z
                    for (ax, m) in [(other, m_other), ('z', big_m.z)] {
                        for (p, q) in [(i, k), (k, i)] {
                            let t = vec![
                                (bld.v(&format!("{ax}_{p}")), 1.0),
                                (bld.v(&format!("{ax}b_{q}")), -1.0),
                                (d, m),
                            ];
                            bld.row(Cep, t, Le, m - 1.0);
                        }
                    }
                    same_bin_rows(&mut bld, Cep, d, i, k, nb);
                }
            }
            for (slot, e) in WALLS.iter().enumerate() {
                let mut t = vec![(bld.v(&format!("cd_{i}_{e}")), 1.0), (dw[slot], -1.0)];
                t.extend((1..=n).filter(|k| *k != i).map(|k| (bld.v(&format!("d_{i}_{k}_{e}")), -1.0)));
                bld.row(Cep, t, Le, 0.0);
            }
            let t = WALLS.iter().map(|e| (bld.v(&format!("cd_{i}_{e}")), 1.0)).collect();
            bld.row(Cep, t, Ge, 2.0);
        }
    }

    // committed boxes are pinned to their placements
    for (idx, mb) in boxes.iter().enumerate() {
        let Some((corner, o, j)) = mb.fixed else { continue };
        let i = idx + 1;
        let far = {
            let ext = crate::geometry::orient(&mb.dims, o);
            [corner[0] + ext[0], corner[1] + ext[1], corner[2] + ext[2]]
        };
        for (k, a) in AXES.iter().enumerate() {
            bld.row(Fixing, vec![(bld.v(&format!("{a}_{i}")), 1.0)], Eq, corner[k] as f64);
            bld.row(Fixing, vec![(bld.v(&format!("{a}b_{i}")), 1.0)], Eq, far[k] as f64);
        }
        bld.row(Fixing, vec![(bld.v(&format!("p_{i}_{j}")), 1.0)], Eq, 1.0);
        for (a, side) in AXES.iter().zip(o.axis_sides()) {
            bld.row(Fixing, vec![(bld.v(&format!("r_{i}_{a}{}", SIDES[side])), 1.0)], Eq, 1.0);
        }
    }

    let model = bld.model;
    model.check_references()?;
    Ok(model)
}

fn orientation_rows(bld: &mut Builder, i: usize, dims: &BoxDims, cfg: &RobotConfig) {
    if cfg.forbid_largest_dim_vertical {
        let sides = dims.sides();
        let max = dims.max_side();
        if sides.iter().filter(|s| **s == max).count() == 1 {
            let side = sides.iter().position(|s| *s == max).unwrap();
            let r = bld.v(&format!("r_{i}_z{}", SIDES[side]));
            bld.row(ConstraintTag::Geometric, vec![(r, 1.0)], Sense::Eq, 0.0);
        }
    }
    for o in Orientation::ALL.into_iter().filter(|o| !cfg.allows(*o)) {
        let t = AXES
            .iter()
            .zip(o.axis_sides())
            .map(|(a, side)| (bld.v(&format!("r_{i}_{a}{}", SIDES[side])), 1.0))
            .collect();
        bld.row(ConstraintTag::Geometric, t, Sense::Le, 2.0);
    }
}

/// `flag = 1` only when boxes `i` and `k` share a bin.
fn same_bin_rows(bld: &mut Builder, tag: ConstraintTag, flag: usize, i: usize, k: usize, nb: usize) {
    if nb < 2 {
        return;
    }
    for j in 1..=nb {
        let t = vec![(flag, 1.0), (bld.v(&format!("p_{i}_{j}")), 1.0), (bld.v(&format!("p_{k}_{j}")), -1.0)];
        bld.row(tag, t, Sense::Le, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Placement;

    fn d(id: u32, l: u32, b: u32, h: u32) -> BoxDims {
        BoxDims::new(id, l, b, h).unwrap()
    }

    fn bins(n: usize, s: [u32; 3]) -> Vec<BinState> {
        (1..=n).map(|i| BinState::new(d(0, s[0], s[1], s[2]), i, i as u64)).collect()
    }

    #[test]
    fn single_box_single_bin_has_seventeen_variables() {
        let m = build_milp(&bins(1, [10, 10, 10]), &[d(1, 2, 3, 4)], &RobotConfig::default(), &Weights::default()).unwrap();
        assert_eq!(m.variables.len(), 17);
        assert_eq!(m.binary_count(), 11);
        // the lone box must sit on the floor
        assert_eq!(m.constraints_tagged(ConstraintTag::Stability).count(), 1);
    }

    #[test]
    fn upright_largest_side_is_fixed_to_zero() {
        let cfg = RobotConfig { forbid_largest_dim_vertical: true, ..RobotConfig::default() };
        let m = build_milp(&bins(1, [40, 40, 40]), &[d(1, 10, 20, 30)], &cfg, &Weights::default()).unwrap();
        let r = m.var("r_1_zh").unwrap();
        assert!(m.constraints.iter().any(|c| c.terms == vec![(r, 1.0)] && c.sense == Sense::Eq && c.rhs == 0.0));
    }

    #[test]
    fn disallowed_orientation_gets_a_cut() {
        let cfg = RobotConfig::default().with_orientations(&[Orientation::Lbh]);
        let m = build_milp(&bins(1, [40, 40, 40]), &[d(1, 10, 20, 30)], &cfg, &Weights::default()).unwrap();
        let cuts = m.constraints.iter().filter(|c| c.sense == Sense::Le && c.rhs == 2.0 && c.terms.len() == 3).count();
        assert_eq!(cuts, 5);
    }

    #[test]
    fn objective_covers_only_lookahead_boxes() {
        let mut open = bins(2, [10, 10, 10]);
        open[0].push(Placement::new(d(7, 4, 4, 4), 1, [0, 0, 0], Orientation::Lbh));
        let m = build_milp(&open, &[d(1, 2, 2, 2), d(2, 3, 3, 3)], &RobotConfig::default(), &Weights::default()).unwrap();
        assert_eq!(m.committed, 1);
        let owners: std::collections::BTreeSet<String> =
            m.objective.iter().map(|(v, _)| m.variables[*v].name.split('_').nth(1).unwrap().to_string()).collect();
        assert_eq!(owners.into_iter().collect::<Vec<_>>(), vec!["2".to_string(), "3".to_string()]);
        assert!(m.constraints_tagged(ConstraintTag::Fixing).count() > 0);
        // committed box 1 is pinned at the origin of bin 1
        let x1 = m.var("x_1").unwrap();
        assert!(m.constraints_tagged(ConstraintTag::Fixing).any(|c| c.terms == vec![(x1, 1.0)] && c.rhs == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_milp(&bins(1, [10, 10, 10]), &[], &RobotConfig::default(), &Weights::default()).is_err());
        assert!(build_milp(&bins(1, [10, 10, 10]), &[d(1, 11, 1, 1)], &RobotConfig::default(), &Weights::default()).is_err());
    }

    #[test]
    fn cep_rows_present_only_when_enabled() {
        let cfg = RobotConfig { require_cep: true, ..RobotConfig::default() };
        let m = build_milp(&bins(2, [10, 10, 10]), &[d(1, 2, 2, 2), d(2, 3, 3, 3)], &cfg, &Weights::default()).unwrap();
        assert!(m.constraints_tagged(ConstraintTag::Cep).count() > 0);
        let m = build_milp(&bins(2, [10, 10, 10]), &[d(1, 2, 2, 2)], &RobotConfig::default(), &Weights::default()).unwrap();
        assert_eq!(m.constraints_tagged(ConstraintTag::Cep).count(), 0);
    }

    #[test]
    fn lp_round_trip_preserves_counts_and_rows() {
        let mut open = bins(2, [10, 10, 10]);
        open[1].push(Placement::new(d(7, 4, 4, 4), 2, [0, 0, 0], Orientation::Lbh));
        let cfg = RobotConfig { require_cep: true, ..RobotConfig::default() };
        let m = build_milp(&open, &[d(1, 2, 2, 2), d(2, 3, 3, 3)], &cfg, &Weights::default()).unwrap();
        let text = m.to_lp_string().unwrap();
        let parsed = parse_lp(&text).unwrap();
        assert_eq!(parsed.variable_count(), m.variables.len());
        assert_eq!(parsed.constraints.len(), m.constraints.len());
        assert_eq!(parsed.objective.len(), m.objective.len());
        for (row, c) in parsed.constraints.iter().zip(&m.constraints) {
            assert_eq!(row.0, c.name);
            assert_eq!(row.1.len(), c.terms.len());
            assert_eq!(row.2, c.sense);
            assert_eq!(row.3, c.rhs);
        }
    }

    #[test]
    fn seventeen_variable_model_exports_seventeen_declarations() {
        let m = build_milp(&bins(1, [10, 10, 10]), &[d(1, 2, 3, 4)], &RobotConfig::default(), &Weights::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.lp-format");
        export_model(&m, &path).unwrap();
        let parsed = parse_lp(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parsed.variable_count(), 17);
    }

    #[test]
    fn empty_objective_is_rejected() {
        let w = Weights { w1: 0.0, w2: 0.0, w3: 0.0 };
        let m = build_milp(&bins(1, [10, 10, 10]), &[d(1, 2, 3, 4)], &RobotConfig::default(), &w).unwrap();
        assert!(m.objective.is_empty());
        assert!(matches!(m.to_lp_string(), Err(Error::Model(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("never.lp-format");
        assert!(export_model(&m, &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn export_is_deterministic() {
        let mut open = bins(3, [12, 10, 8]);
        open[0].push(Placement::new(d(7, 4, 4, 4), 1, [0, 0, 0], Orientation::Lbh));
        let build = || build_milp(&open, &[d(1, 2, 2, 2), d(2, 3, 3, 3), d(3, 1, 2, 3)], &RobotConfig::default(), &Weights::default()).unwrap().to_lp_string().unwrap();
        assert_eq!(build(), build());
    }
}
