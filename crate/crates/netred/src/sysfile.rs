//! Line-oriented network description files: parse, validate, and serialize
//! canonically (17 significant digits, fixed section order) so that
//! write → parse → write is byte-identical.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::mas::{leader_follower_input, AgentDynamics, LinearMas};
use crate::nonlinear::NonlinearMas;
use nalgebra::{DMatrix, DVector};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum InertiaSpec {
    Uniform(f64),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    /// 1-based leader vertices; column k selects leader k.
    Leaders(Vec<usize>),
    Dense(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutputSpec {
    /// `𝖢 = 𝖶^{1/2}𝖱ᵀ` from the graph's incidence structure.
    Incidence,
    Identity,
    Dense(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentSpec {
    SingleIntegrator,
    VanDerPol { mu: f64, sigma: f64, c: f64 },
    Matrices {
        e: DMatrix<f64>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        k: DMatrix<f64>,
    },
}

impl AgentSpec {
    pub fn dim(&self) -> usize {
        match self {
            AgentSpec::SingleIntegrator => 1,
            AgentSpec::VanDerPol { .. } => 2,
            AgentSpec::Matrices { a, .. } => a.nrows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemFile {
    pub name: String,
    pub n_vertices: usize,
    /// 1-based weighted edges in file order.
    pub edges: Vec<(usize, usize, f64)>,
    pub inertias: InertiaSpec,
    pub input: InputSpec,
    pub output: OutputSpec,
    pub agent: AgentSpec,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a number, found {tok:?}"),
    })
}

fn parse_u(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a nonnegative integer, found {tok:?}"),
    })
}

struct Cursor<'a> {
    /// (1-based line number, tokenized content) for non-blank, non-comment lines.
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let t = raw.trim();
                if t.is_empty() || t.starts_with('#') {
                    None
                } else {
                    Some((i + 1, t.split_whitespace().collect::<Vec<_>>()))
                }
            })
            .collect();
        Self { lines, pos: 0 }
    }

    fn peek(&self) -> Option<&(usize, Vec<&'a str>)> {
        self.lines.get(self.pos)
    }

    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        let item = self.lines.get(self.pos).cloned();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn last_line(&self) -> usize {
        self.lines.last().map(|(l, _)| *l).unwrap_or(0)
    }
}

fn read_matrix(
    cur: &mut Cursor,
    key: &str,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::<f64>::zeros(rows, cols);
    for r in 0..rows {
        let (line, toks) = cur.next().ok_or(Error::Parse {
            line: cur.last_line(),
            msg: format!("unexpected end of file, expected {key} row {}", r + 1),
        })?;
        if toks[0] != key {
            return Err(Error::Parse {
                line,
                msg: format!("expected {key}, found {:?}", toks[0]),
            });
        }
        if toks.len() != cols + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("{key} needs {cols} entries, found {}", toks.len() - 1),
            });
        }
        for c in 0..cols {
            m[(r, c)] = parse_f(toks[c + 1], line)?;
        }
    }
    Ok(m)
}

impl SystemFile {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cur = Cursor::new(text);

        let (line, header) = cur.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        if header != ["netred-system", "v1"] {
            return Err(Error::Parse {
                line,
                msg: "expected header line \"netred-system v1\"".into(),
            });
        }
        let (line, name_line) = cur.next().ok_or(Error::Parse {
            line,
            msg: "missing name line".into(),
        })?;
        if name_line[0] != "name" || name_line.len() < 2 {
            return Err(Error::Parse {
                line,
                msg: "expected \"name <identifier>\"".into(),
            });
        }
        let name = name_line[1..].join(" ");

        let mut graph: Option<(usize, Vec<(usize, usize, f64)>)> = None;
        let mut inertias: Option<InertiaSpec> = None;
        let mut input: Option<InputSpec> = None;
        let mut output: Option<OutputSpec> = None;
        let mut agent: Option<AgentSpec> = None;

        while let Some((line, toks)) = cur.next() {
            let already = |line: usize, what: &str| Error::Parse {
                line,
                msg: format!("duplicate section [{what}]"),
            };
            match toks[0] {
                "[graph]" => {
                    if graph.is_some() {
                        return Err(already(line, "graph"));
                    }
                    graph = Some(Self::parse_graph(&mut cur)?);
                }
                "[inertias]" => {
                    if inertias.is_some() {
                        return Err(already(line, "inertias"));
                    }
                    inertias = Some(Self::parse_inertias(&mut cur)?);
                }
                "[input]" => {
                    if input.is_some() {
                        return Err(already(line, "input"));
                    }
                    input = Some(Self::parse_input(&mut cur)?);
                }
                "[output]" => {
                    if output.is_some() {
                        return Err(already(line, "output"));
                    }
                    output = Some(Self::parse_output(&mut cur)?);
                }
                "[agent]" => {
                    if agent.is_some() {
                        return Err(already(line, "agent"));
                    }
                    agent = Some(Self::parse_agent(&mut cur)?);
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown section or key {other:?}"),
                    });
                }
            }
        }

        let (n_vertices, edges) = graph.ok_or(Error::Parse {
            line: cur.last_line(),
            msg: "missing [graph] section".into(),
        })?;
        let missing = |what: &str| Error::Parse {
            line: cur.last_line(),
            msg: format!("missing [{what}] section"),
        };
        let sf = SystemFile {
            name,
            n_vertices,
            edges,
            inertias: inertias.ok_or_else(|| missing("inertias"))?,
            input: input.ok_or_else(|| missing("input"))?,
            output: output.ok_or_else(|| missing("output"))?,
            agent: agent.ok_or_else(|| missing("agent"))?,
        };
        sf.validate(cur.last_line())?;
        Ok(sf)
    }

    fn parse_graph(cur: &mut Cursor) -> Result<(usize, Vec<(usize, usize, f64)>)> {
        let (line, toks) = cur.next().ok_or(Error::Parse {
            line: cur.last_line(),
            msg: "empty [graph] section".into(),
        })?;
        if toks[0] != "vertices" || toks.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: "graph section must start with \"vertices <n>\"".into(),
            });
        }
        let n = parse_u(toks[1], line)?;
        if n == 0 {
            return Err(Error::Parse {
                line,
                msg: "vertex count must be positive".into(),
            });
        }
        let mut edges = Vec::new();
        while let Some((_, toks)) = cur.peek() {
            if toks[0] != "edge" {
                break;
            }
            let (line, toks) = cur.next().unwrap();
            if toks.len() != 4 {
                return Err(Error::Parse {
                    line,
                    msg: "edge lines are \"edge <i> <j> <w>\"".into(),
                });
            }
            let i = parse_u(toks[1], line)?;
            let j = parse_u(toks[2], line)?;
            let w = parse_f(toks[3], line)?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::Parse {
                    line,
                    msg: format!("edge endpoint out of range 1..={n}"),
                });
            }
            edges.push((i, j, w));
        }
        Ok((n, edges))
    }

    fn parse_inertias(cur: &mut Cursor) -> Result<InertiaSpec> {
        let (line, toks) = cur.next().ok_or(Error::Parse {
            line: cur.last_line(),
            msg: "empty [inertias] section".into(),
        })?;
        match toks[0] {
            "uniform" if toks.len() == 2 => Ok(InertiaSpec::Uniform(parse_f(toks[1], line)?)),
            "values" if toks.len() >= 2 => {
                let vals = toks[1..]
                    .iter()
                    .map(|t| parse_f(t, line))
                    .collect::<Result<Vec<_>>>()?;
                Ok(InertiaSpec::Values(vals))
            }
            other => Err(Error::Parse {
                line,
                msg: format!("inertias must be \"uniform <v>\" or \"values <v...>\", found {other:?}"),
            }),
        }
    }

    fn parse_input(cur: &mut Cursor) -> Result<InputSpec> {
        let (line, toks) = cur.next().ok_or(Error::Parse {
            line: cur.last_line(),
            msg: "empty [input] section".into(),
        })?;
        match toks[0] {
            "leaders" if toks.len() >= 2 => {
                let ids = toks[1..]
                    .iter()
                    .map(|t| parse_u(t, line))
                    .collect::<Result<Vec<_>>>()?;
                Ok(InputSpec::Leaders(ids))
            }
            "dense" if toks.len() == 3 => {
                let rows = parse_u(toks[1], line)?;
                let cols = parse_u(toks[2], line)?;
                Ok(InputSpec::Dense(read_matrix(cur, "row", rows, cols)?))
            }
            other => Err(Error::Parse {
                line,
                msg: format!("input must be \"leaders <i...>\" or \"dense <r> <c>\", found {other:?}"),
            }),
        }
    }

    fn parse_output(cur: &mut Cursor) -> Result<OutputSpec> {
        let (line, toks) = cur.next().ok_or(Error::Parse {
            line: cur.last_line(),
            msg: "empty [output] section".into(),
        })?;
        match toks[0] {
            "incidence" if toks.len() == 1 => Ok(OutputSpec::Incidence),
            "identity" if toks.len() == 1 => Ok(OutputSpec::Identity),
            "dense" if toks.len() == 3 => {
                let rows = parse_u(toks[1], line)?;
                let cols = parse_u(toks[2], line)?;
                Ok(OutputSpec::Dense(read_matrix(cur, "row", rows, cols)?))
            }
            other => Err(Error::Parse {
                line,
                msg: format!(
                    "output must be \"incidence\", \"identity\" or \"dense <r> <c>\", found {other:?}"
                ),
            }),
        }
    }

    fn parse_agent(cur: &mut Cursor) -> Result<AgentSpec> {
        let (line, toks) = cur.next().ok_or(Error::Parse {
            line: cur.last_line(),
            msg: "empty [agent] section".into(),
        })?;
        match toks[0] {
            "single_integrator" if toks.len() == 1 => Ok(AgentSpec::SingleIntegrator),
            "vanderpol" if toks.len() == 7 => {
                if toks[1] != "mu" || toks[3] != "sigma" || toks[5] != "c" {
                    return Err(Error::Parse {
                        line,
                        msg: "vanderpol line is \"vanderpol mu <v> sigma <v> c <v>\"".into(),
                    });
                }
                Ok(AgentSpec::VanDerPol {
                    mu: parse_f(toks[2], line)?,
                    sigma: parse_f(toks[4], line)?,
                    c: parse_f(toks[6], line)?,
                })
            }
            "matrices" if toks.len() == 7 => {
                if toks[1] != "dim" || toks[3] != "inputs" || toks[5] != "outputs" {
                    return Err(Error::Parse {
                        line,
                        msg: "matrices line is \"matrices dim <n> inputs <m> outputs <p>\"".into(),
                    });
                }
                let n = parse_u(toks[2], line)?;
                let m = parse_u(toks[4], line)?;
                let p = parse_u(toks[6], line)?;
                let e = read_matrix(cur, "e_row", n, n)?;
                let a = read_matrix(cur, "a_row", n, n)?;
                let b = read_matrix(cur, "b_row", n, m)?;
                let c = read_matrix(cur, "c_row", p, n)?;
                let k = read_matrix(cur, "k_row", m, p)?;
                Ok(AgentSpec::Matrices { e, a, b, c, k })
            }
            other => Err(Error::Parse {
                line,
                msg: format!("unknown agent form {other:?}"),
            }),
        }
    }

    fn validate(&self, last_line: usize) -> Result<()> {
        let n = self.n_vertices;
        let bad = |msg: String| Error::Parse { line: last_line, msg };
        if let InertiaSpec::Values(v) = &self.inertias {
            if v.len() != n {
                return Err(bad(format!("expected {n} inertia values, found {}", v.len())));
            }
        }
        match &self.input {
            InputSpec::Leaders(ids) => {
                if ids.is_empty() || ids.iter().any(|&i| i == 0 || i > n) {
                    return Err(bad(format!("leader ids must lie in 1..={n}")));
                }
            }
            InputSpec::Dense(m) => {
                if m.nrows() != n {
                    return Err(bad(format!("input matrix needs {n} rows, has {}", m.nrows())));
                }
            }
        }
        if let OutputSpec::Dense(m) = &self.output {
            if m.ncols() != n {
                return Err(bad(format!("output matrix needs {n} columns, has {}", m.ncols())));
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it reproduces `self` exactly.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        s.push_str("netred-system v1\n");
        s.push_str(&format!("name {}\n", self.name));
        s.push_str("[graph]\n");
        s.push_str(&format!("vertices {}\n", self.n_vertices));
        for &(i, j, w) in &self.edges {
            s.push_str(&format!("edge {i} {j} {}\n", fmt_f(w)));
        }
        s.push_str("[inertias]\n");
        match &self.inertias {
            InertiaSpec::Uniform(v) => s.push_str(&format!("uniform {}\n", fmt_f(*v))),
            InertiaSpec::Values(vals) => {
                let joined: Vec<String> = vals.iter().map(|&v| fmt_f(v)).collect();
                s.push_str(&format!("values {}\n", joined.join(" ")));
            }
        }
        s.push_str("[input]\n");
        match &self.input {
            InputSpec::Leaders(ids) => {
                let joined: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                s.push_str(&format!("leaders {}\n", joined.join(" ")));
            }
            InputSpec::Dense(m) => s.push_str(&matrix_block("row", m)),
        }
        s.push_str("[output]\n");
        match &self.output {
            OutputSpec::Incidence => s.push_str("incidence\n"),
            OutputSpec::Identity => s.push_str("identity\n"),
            OutputSpec::Dense(m) => s.push_str(&matrix_block("row", m)),
        }
        s.push_str("[agent]\n");
        match &self.agent {
            AgentSpec::SingleIntegrator => s.push_str("single_integrator\n"),
            AgentSpec::VanDerPol { mu, sigma, c } => s.push_str(&format!(
                "vanderpol mu {} sigma {} c {}\n",
                fmt_f(*mu),
                fmt_f(*sigma),
                fmt_f(*c)
            )),
            AgentSpec::Matrices { e, a, b, c, k } => {
                s.push_str(&format!(
                    "matrices dim {} inputs {} outputs {}\n",
                    e.nrows(),
                    b.ncols(),
                    c.nrows()
                ));
                for (key, m) in [("e_row", e), ("a_row", a), ("b_row", b), ("c_row", c), ("k_row", k)]
                {
                    s.push_str(&rows_only(key, m));
                }
            }
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_canonical_string())?;
        Ok(())
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self.agent, AgentSpec::VanDerPol { .. })
    }

    pub fn build_graph(&self) -> Result<WeightedGraph> {
        WeightedGraph::undirected(self.n_vertices, &self.edges)
    }

    fn network_matrices(&self) -> Result<(WeightedGraph, DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let graph = self.build_graph()?;
        let n = self.n_vertices;
        let inertias = match &self.inertias {
            InertiaSpec::Uniform(v) => DVector::from_element(n, *v),
            InertiaSpec::Values(vals) => DVector::from_vec(vals.clone()),
        };
        let input = match &self.input {
            InputSpec::Leaders(ids) => leader_follower_input(n, ids)?,
            InputSpec::Dense(m) => m.clone(),
        };
        let output = match &self.output {
            OutputSpec::Incidence => {
                let mats = graph.build_matrices();
                let mut c = DMatrix::<f64>::zeros(graph.n_edges(), n);
                for (e_idx, &(_, _, w)) in graph.edges().iter().enumerate() {
                    for v in 0..n {
                        c[(e_idx, v)] = w.sqrt() * mats.incidence[(v, e_idx)];
                    }
                }
                c
            }
            OutputSpec::Identity => DMatrix::identity(n, n),
            OutputSpec::Dense(m) => m.clone(),
        };
        Ok((graph, inertias, input, output))
    }

    pub fn to_linear(&self) -> Result<LinearMas> {
        let agent = match &self.agent {
            AgentSpec::SingleIntegrator => AgentDynamics::single_integrator(),
            AgentSpec::Matrices { e, a, b, c, k } => {
                AgentDynamics::new(e.clone(), a.clone(), b.clone(), c.clone(), k.clone())?
            }
            AgentSpec::VanDerPol { .. } => {
                return Err(Error::Model(
                    "van der Pol agents are nonlinear; build a NonlinearMas".into(),
                ));
            }
        };
        let (graph, inertias, input, output) = self.network_matrices()?;
        LinearMas::new(graph, inertias, input, output, agent)
    }

    pub fn to_nonlinear(&self) -> Result<NonlinearMas> {
        match &self.agent {
            AgentSpec::VanDerPol { mu, sigma, c } => {
                let (graph, inertias, input, output) = self.network_matrices()?;
                let (mu, sigma, c) = (*mu, *sigma, *c);
                NonlinearMas::new(
                    graph,
                    inertias,
                    input,
                    output,
                    2,
                    Arc::new(move |x: &DVector<f64>| {
                        DVector::from_vec(vec![x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0]])
                    }),
                    Arc::new(move |_: &DVector<f64>| {
                        DMatrix::from_column_slice(2, 1, &[sigma, -c])
                    }),
                    Arc::new(|x: &DVector<f64>| DVector::from_element(1, x[0] + x[1])),
                    Arc::new(|zi: &DVector<f64>, zj: &DVector<f64>| zi - zj),
                )
            }
            _ => NonlinearMas::from_linear(&self.to_linear()?),
        }
    }
}

fn matrix_block(key: &str, m: &DMatrix<f64>) -> String {
    let mut s = format!("dense {} {}\n", m.nrows(), m.ncols());
    s.push_str(&rows_only(key, m));
    s
}

fn rows_only(key: &str, m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        let vals: Vec<String> = (0..m.ncols()).map(|c| fmt_f(m[(r, c)])).collect();
        s.push_str(&format!("{key} {}\n", vals.join(" ")));
    }
    s
}
