//! Exact tables of the metric jet, `Q₀(e2+e4+e6, ·)` and the cubic
//! integrand, their CSV fixtures, and Markdown/CSV emitters.
//!
//! Fixture cells are expressions such as `x1*x3-3/2*x6*v1` or `-1/3*sqrt3`;
//! they are parsed and compared exactly, so only mathematical differences
//! show up as diffs.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::calculus::{Calculus, IdentityCheck, IdentityReport};
use crate::cone::{eta_metric_jet, MetricJet, TABLE_ORDER};
use crate::obstruction::{cubic_integrand_raw, q0, q0_matrix, DeformationVector, QSqrt3, BASIS_NAMES};
use crate::poly::{Poly, Var, Q};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TableError {
    #[error("cannot parse `{input}`: {msg}")]
    Parse { input: String, msg: String },
    #[error("malformed table {0}: {1}")]
    Shape(String, String),
    #[error("io: {0}")]
    Io(String),
}

/// Values that fixture expressions denote.
pub trait Scalar: Clone + PartialEq + fmt::Display {
    fn from_q(q: Q) -> Self;
    fn atom(name: &str) -> Option<Self>;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Scalar for Poly {
    fn from_q(q: Q) -> Poly {
        Poly::constant(q)
    }
    fn atom(name: &str) -> Option<Poly> {
        let (head, idx) = name.split_at(1);
        let i: u8 = idx.parse().ok()?;
        match head {
            "v" if (1..=3).contains(&i) => Some(Poly::v(i)),
            "x" if (1..=6).contains(&i) => Some(Poly::x(i)),
            "b" if (1..=crate::poly::NUM_FREE as u8).contains(&i) => Some(Poly::var(Var::B(i))),
            _ => None,
        }
    }
    fn add(&self, o: &Poly) -> Poly {
        self.clone() + o.clone()
    }
    fn mul(&self, o: &Poly) -> Poly {
        self * o
    }
    fn neg(&self) -> Poly {
        -self.clone()
    }
}

impl Scalar for QSqrt3 {
    fn from_q(q: Q) -> QSqrt3 {
        QSqrt3::rational(q)
    }
    fn atom(name: &str) -> Option<QSqrt3> {
        (name == "sqrt3").then(|| QSqrt3::sqrt3(Q::from_integer(1.into())))
    }
    fn add(&self, o: &QSqrt3) -> QSqrt3 {
        self + o
    }
    fn mul(&self, o: &QSqrt3) -> QSqrt3 {
        self * o
    }
    fn neg(&self) -> QSqrt3 {
        -self
    }
}

/// `expr := ['+'|'-'] term (('+'|'-') term)*`, `term := factor ('*' factor)*`,
/// `factor := int ['/' int] | name ['^' int]`.
pub fn parse_expr<T: Scalar>(input: &str) -> Result<T, TableError> {
    let err = |msg: &str| TableError::Parse { input: input.into(), msg: msg.into() };
    let s: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty"));
    }
    let mut pos = 0;
    let mut total: Option<T> = None;
    while pos < s.len() {
        let mut negative = false;
        if s[pos] == '+' || s[pos] == '-' {
            negative = s[pos] == '-';
            pos += 1;
        } else if total.is_some() {
            return Err(err("expected + or -"));
        }
        let mut term = T::from_q(Q::from_integer(1.into()));
        loop {
            let start = pos;
            let factor = if pos < s.len() && s[pos].is_ascii_digit() {
                while pos < s.len() && s[pos].is_ascii_digit() {
                    pos += 1;
                }
                let num: String = s[start..pos].iter().collect();
                let mut q: Q = Q::from_integer(num.parse().map_err(|_| err("bad integer"))?);
                if pos < s.len() && s[pos] == '/' {
                    pos += 1;
                    let ds = pos;
                    while pos < s.len() && s[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let den: String = s[ds..pos].iter().collect();
                    let d: num_bigint::BigInt = den.parse().map_err(|_| err("bad denominator"))?;
                    if d == 0.into() {
                        return Err(err("zero denominator"));
                    }
                    q /= Q::from_integer(d);
                }
                T::from_q(q)
            } else if pos < s.len() && s[pos].is_ascii_alphabetic() {
                while pos < s.len() && s[pos].is_ascii_alphanumeric() {
                    pos += 1;
                }
                let name: String = s[start..pos].iter().collect();
                let base = T::atom(&name).ok_or_else(|| err(&format!("unknown symbol {name}")))?;
                let mut e = 1u32;
                if pos < s.len() && s[pos] == '^' {
                    pos += 1;
                    let es = pos;
                    while pos < s.len() && s[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let es: String = s[es..pos].iter().collect();
                    e = es.parse().map_err(|_| err("bad exponent"))?;
                }
                let mut f = T::from_q(Q::from_integer(1.into()));
                for _ in 0..e {
                    f = f.mul(&base);
                }
                f
            } else {
                return Err(err("expected a number or a symbol"));
            };
            term = term.mul(&factor);
            if pos < s.len() && s[pos] == '*' {
                pos += 1;
                continue;
            }
            break;
        }
        if negative {
            term = term.neg();
        }
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term),
        });
    }
    total.ok_or_else(|| err("empty"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table<T> {
    pub name: String,
    pub corner: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellDiff {
    pub table: String,
    pub row: String,
    pub col: String,
    pub fixture: String,
    pub computed: String,
}

impl fmt::Display for CellDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}, {}]: fixture `{}`, computed `{}`", self.table, self.row, self.col, self.fixture, self.computed)
    }
}

impl<T: Scalar> Table<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.corner);
        for c in &self.cols {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (r, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(r);
            for x in row {
                out.push(',');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("| {} |", self.corner);
        for c in &self.cols {
            out.push_str(&format!(" {c} |"));
        }
        out.push('\n');
        out.push_str(&"|---".repeat(self.cols.len() + 1));
        out.push_str("|\n");
        for (r, row) in self.rows.iter().zip(&self.cells) {
            out.push_str(&format!("| {r} |"));
            for x in row {
                out.push_str(&format!(" `{x}` |"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Table<T>, TableError> {
        let shape = |m: String| TableError::Shape(name.into(), m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines.next().ok_or_else(|| shape("empty".into()))?.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != header.len() {
                return Err(shape(format!("row `{line}` has {} cells, header has {}", parts.len(), header.len())));
            }
            rows.push(parts[0].trim().to_string());
            cells.push(parts[1..].iter().map(|p| parse_expr::<T>(p)).collect::<Result<Vec<T>, _>>()?);
        }
        Ok(Table { name: name.into(), corner: header[0].clone(), rows, cols: header[1..].to_vec(), cells })
    }

    /// Cell-by-cell differences against a fixture with the same labels.
    pub fn diff(&self, fixture: &Table<T>) -> Result<Vec<CellDiff>, TableError> {
        if self.rows != fixture.rows || self.cols != fixture.cols {
            return Err(TableError::Shape(
                self.name.clone(),
                format!("labels differ: computed {:?}x{:?}, fixture {:?}x{:?}", self.rows, self.cols, fixture.rows, fixture.cols),
            ));
        }
        let mut out = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                if self.cells[i][j] != fixture.cells[i][j] {
                    out.push(CellDiff {
                        table: self.name.clone(),
                        row: r.clone(),
                        col: c.clone(),
                        fixture: fixture.cells[i][j].to_string(),
                        computed: self.cells[i][j].to_string(),
                    });
                }
            }
        }
        Ok(out)
    }
}

fn labels(idx: &[usize]) -> Vec<String> {
    idx.iter().map(|i| i.to_string()).collect()
}

/// `B⁽¹⁾` in the order `0, 1, 3, 5, 2, 4, 6`.
pub fn b1_table(jet: &MetricJet) -> Table<Poly> {
    let b1 = jet.b1();
    Table {
        name: "b1".into(),
        corner: "B1".into(),
        rows: labels(&TABLE_ORDER),
        cols: labels(&TABLE_ORDER),
        cells: TABLE_ORDER.iter().map(|&i| TABLE_ORDER.iter().map(|&j| b1[i][j].clone()).collect()).collect(),
    }
}

/// `B⁽¹⁾B⁽¹⁾ − B⁽²⁾` on rows `1,3,5,2,4,6` against columns `1,3,5` and `2,4,6`.
pub fn combined_tables(jet: &MetricJet) -> [Table<Poly>; 2] {
    let c = jet.combined();
    let rows = [1, 3, 5, 2, 4, 6];
    let make = |name: &str, cols: [usize; 3]| Table {
        name: name.into(),
        corner: "B1B1-B2".into(),
        rows: labels(&rows),
        cols: labels(&cols),
        cells: rows.iter().map(|&i| cols.iter().map(|&j| c[i][j].clone()).collect()).collect(),
    };
    [make("c_odd", [1, 3, 5]), make("c_even", [2, 4, 6])]
}

/// Linear coefficient of `det B` in `s`.
pub fn det_table(jet: &MetricJet) -> Table<Poly> {
    Table {
        name: "det".into(),
        corner: "det(B)".into(),
        rows: vec!["s^1".into()],
        cols: vec!["coefficient".into()],
        cells: vec![vec![jet.det.c[1].clone()]],
    }
}

/// Row `k`: the components of `Q₀(e2+e4+e6, basis_k)`.
pub fn q0_table() -> Table<QSqrt3> {
    let m = q0_matrix(&DeformationVector::v0());
    let names: Vec<String> = BASIS_NAMES.iter().map(|s| s.to_string()).collect();
    Table {
        name: "q0_columns".into(),
        corner: "Q0(e2+e4+e6;.)".into(),
        rows: names.clone(),
        cols: names,
        cells: (0..8).map(|k| (0..8).map(|i| m[i][k].clone()).collect()).collect(),
    }
}

pub fn cubic_table(calc: &Calculus) -> Result<Table<Poly>, crate::obstruction::ObstructionError> {
    Ok(Table {
        name: "cubic".into(),
        corner: "integrand".into(),
        rows: vec!["P".into()],
        cols: vec!["closed form".into()],
        cells: vec![vec![cubic_integrand_raw(calc)?]],
    })
}

/// Fixture texts, one CSV per table.
#[derive(Clone, Debug)]
pub struct Fixtures {
    pub b1: String,
    pub c_odd: String,
    pub c_even: String,
    pub det: String,
    pub q0: String,
    pub cubic: String,
}

pub const FIXTURE_FILES: [&str; 6] = ["b1.csv", "c_odd.csv", "c_even.csv", "det.csv", "q0_columns.csv", "cubic.csv"];

impl Fixtures {
    pub fn builtin() -> Fixtures {
        Fixtures {
            b1: include_str!("../fixtures/b1.csv").into(),
            c_odd: include_str!("../fixtures/c_odd.csv").into(),
            c_even: include_str!("../fixtures/c_even.csv").into(),
            det: include_str!("../fixtures/det.csv").into(),
            q0: include_str!("../fixtures/q0_columns.csv").into(),
            cubic: include_str!("../fixtures/cubic.csv").into(),
        }
    }

    pub fn from_dir(dir: &Path) -> Result<Fixtures, TableError> {
        let read = |f: &str| std::fs::read_to_string(dir.join(f)).map_err(|e| TableError::Io(format!("{}: {e}", dir.join(f).display())));
        Ok(Fixtures {
            b1: read(FIXTURE_FILES[0])?,
            c_odd: read(FIXTURE_FILES[1])?,
            c_even: read(FIXTURE_FILES[2])?,
            det: read(FIXTURE_FILES[3])?,
            q0: read(FIXTURE_FILES[4])?,
            cubic: read(FIXTURE_FILES[5])?,
        })
    }
}

fn table_check<T: Scalar>(label: &str, computed: Result<Table<T>, String>, fixture_name: &str, fixture: &str) -> IdentityCheck {
    let result = computed.and_then(|c| {
        let fx = Table::<T>::from_csv(fixture_name, fixture).map_err(|e| e.to_string())?;
        c.diff(&fx).map_err(|e| e.to_string())
    });
    match result {
        Ok(d) if d.is_empty() => IdentityCheck::from_bool(label, true, String::new),
        Ok(d) => IdentityCheck::from_bool(label, false, || d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")),
        Err(e) => IdentityCheck::from_bool(label, false, || e),
    }
}

/// Every computed table against its fixture, plus the symmetry of
/// `Q₀(e2+e4+e6, ·)` and `Q₀(v, v) = 2v`.
pub fn tables_report(calc: &Calculus, fx: &Fixtures) -> IdentityReport {
    let jet = eta_metric_jet(calc).map_err(|e| e.to_string());
    let mut checks = vec![
        table_check("B1 table", jet.as_ref().map(b1_table).map_err(|e| e.clone()), "b1", &fx.b1),
        table_check("B1B1-B2 table (columns 1,3,5)", jet.as_ref().map(|j| combined_tables(j)[0].clone()).map_err(|e| e.clone()), "c_odd", &fx.c_odd),
        table_check("B1B1-B2 table (columns 2,4,6)", jet.as_ref().map(|j| combined_tables(j)[1].clone()).map_err(|e| e.clone()), "c_even", &fx.c_even),
        table_check("det(B) linear coefficient", jet.as_ref().map(det_table).map_err(|e| e.clone()), "det", &fx.det),
        table_check("Q0 columns", Ok(q0_table()), "q0_columns", &fx.q0),
    ];
    let m = q0_matrix(&DeformationVector::v0());
    let symmetric = (0..8).all(|i| (0..8).all(|j| m[i][j] == m[j][i]));
    checks.push(IdentityCheck::from_bool("Q0(e2+e4+e6, .) symmetric", symmetric, String::new));
    let v = DeformationVector::v0();
    let qvv = q0(&v, &v);
    let two_v = v.scale(&QSqrt3::int(2));
    checks.push(IdentityCheck::from_bool("Q0(v, v) = 2v", qvv == two_v, || format!("{qvv}")));
    checks.push(table_check("cubic integrand", cubic_table(calc).map_err(|e| e.to_string()), "cubic", &fx.cubic));
    IdentityReport { suite: "tables".into(), checks }
}

/// Computed tables as `(file name, CSV, Markdown)`.
pub fn emit_tables(calc: &Calculus) -> Result<Vec<(String, String, String)>, String> {
    let jet = eta_metric_jet(calc).map_err(|e| e.to_string())?;
    let [c_odd, c_even] = combined_tables(&jet);
    let cubic = cubic_table(calc).map_err(|e| e.to_string())?;
    let polys = [b1_table(&jet), c_odd, c_even, det_table(&jet), cubic];
    let mut out: Vec<(String, String, String)> = polys.iter().map(|t| (t.name.clone(), t.to_csv(), t.to_markdown())).collect();
    let q = q0_table();
    out.push((q.name.clone(), q.to_csv(), q.to_markdown()));
    Ok(out)
}
