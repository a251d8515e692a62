//! The semi-structured `(dv, dc, L, N)` coupled ensemble.
//!
//! Each of the `L` spatial positions holds `N` variable nodes (VNs) and
//! `M = dv N / dc` check nodes (CNs). A VN at position `i` has exactly one edge
//! into each CN position `i, i+1, ..., i+dv-1`; which CN inside a position it
//! lands on is random. Positions are zero-based in code: VN positions are
//! `0..L`, CN positions `0..L+dv-1` (terminated) or `0..L` (truncated).
//!
//! VN `v` lives at position `v / N` and CN `c` at position `c / M`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, SimRng};

/// Marks an edge slot that was clipped away (truncated ensemble).
pub const NO_EDGE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// `dv - 1` extra CN-only positions close the right end of the chain.
    Terminated,
    /// No extra positions; edges that would leave the chain are dropped.
    Truncated,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Terminated => "terminated",
            Termination::Truncated => "truncated",
        })
    }
}

impl FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "terminated" | "term" => Ok(Termination::Terminated),
            "truncated" | "trunc" => Ok(Termination::Truncated),
            other => Err(Error::InvalidParams(format!("unknown termination `{other}`"))),
        }
    }
}

/// How edges arriving at a CN position are spread over its `M` CNs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CnAssignment {
    /// The `M dc` CN sockets of a position are permuted uniformly and the
    /// incoming edges occupy a uniformly random subset of them. Interior CNs
    /// have degree exactly `dc`; boundary CNs get fewer edges.
    #[default]
    Socket,
    /// Every edge picks one of the `M` CNs independently and uniformly
    /// (CN degrees are then binomial around `dc` in the interior).
    Uniform,
}

/// `(dv, dc, L, N)` plus termination kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnsembleParams {
    pub dv: usize,
    pub dc: usize,
    pub l: usize,
    pub n: usize,
    pub kind: Termination,
}

impl EnsembleParams {
    pub fn new(dv: usize, dc: usize, l: usize, n: usize, kind: Termination) -> Result<Self> {
        let p = EnsembleParams { dv, dc, l, n, kind };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dv < 2 {
            return Err(Error::InvalidParams(format!("dv = {} must be at least 2", self.dv)));
        }
        if self.dc <= self.dv {
            return Err(Error::InvalidParams(format!(
                "dc = {} must exceed dv = {}",
                self.dc, self.dv
            )));
        }
        if self.l == 0 || self.n == 0 {
            return Err(Error::InvalidParams("L and N must be positive".into()));
        }
        if (self.dv * self.n) % self.dc != 0 {
            return Err(Error::InvalidParams(format!(
                "dv*N = {} is not divisible by dc = {}",
                self.dv * self.n,
                self.dc
            )));
        }
        let edges = self.dv as u64 * self.n as u64 * self.l as u64;
        if edges >= u32::MAX as u64 {
            return Err(Error::InvalidParams("graph too large for 32-bit node indices".into()));
        }
        Ok(())
    }

    /// CNs per position.
    pub fn m(&self) -> usize {
        self.dv * self.n / self.dc
    }

    pub fn cn_positions(&self) -> usize {
        match self.kind {
            Termination::Terminated => self.l + self.dv - 1,
            Termination::Truncated => self.l,
        }
    }

    pub fn n_vns(&self) -> usize {
        self.l * self.n
    }

    pub fn n_cns(&self) -> usize {
        self.cn_positions() * self.m()
    }

    pub fn with_kind(mut self, kind: Termination) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = l;
        self
    }
}

impl fmt::Display for EnsembleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},L={},N={},{})", self.dv, self.dc, self.l, self.n, self.kind)
    }
}

/// A sampled Tanner graph.
///
/// Stored VN-major with a fixed stride of `dv` slots per VN; slot `k` of VN
/// `v` holds its CN at position `pos(v) + k`, or [`NO_EDGE`] when clipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    params: EnsembleParams,
    vn_adj: Vec<u32>,
}

/// CN-side adjacency in compressed-row form.
#[derive(Debug, Clone)]
pub struct CnAdjacency {
    pub offsets: Vec<usize>,
    pub vns: Vec<u32>,
}

impl CnAdjacency {
    pub fn neighbors(&self, c: usize) -> &[u32] {
        &self.vns[self.offsets[c]..self.offsets[c + 1]]
    }
}

impl TannerGraph {
    /// Samples a graph with the default socket assignment.
    pub fn sample(params: EnsembleParams, seed: u64) -> Result<Self> {
        Self::sample_with(params, CnAssignment::Socket, seed)
    }

    pub fn sample_with(params: EnsembleParams, assignment: CnAssignment, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = rng_from(derive_seed(seed, &[0x6772_6170_68]));
        Ok(Self::sample_rng(params, assignment, &mut rng))
    }

    fn sample_rng(params: EnsembleParams, assignment: CnAssignment, rng: &mut SimRng) -> Self {
        let EnsembleParams { dv, dc, l, n, .. } = params;
        let m = params.m();
        let sockets = m * dc;
        let mut vn_adj = vec![NO_EDGE; l * n * dv];
        let mut perm: Vec<u32> = Vec::with_capacity(sockets);

        for j in 0..params.cn_positions() {
            let first_vn_pos = j.saturating_sub(dv - 1);
            let last_vn_pos = j.min(l - 1);
            if first_vn_pos > last_vn_pos {
                continue;
            }
            let incoming = (last_vn_pos - first_vn_pos + 1) * n;
            let cn_base = (j * m) as u32;
            match assignment {
                CnAssignment::Socket => {
                    perm.clear();
                    perm.extend(0..sockets as u32);
                    // partial Fisher-Yates: perm[..incoming] is a uniform sample
                    for e in 0..incoming {
                        let r = rng.random_range(e..sockets);
                        perm.swap(e, r);
                    }
                    let mut e = 0;
                    for i in first_vn_pos..=last_vn_pos {
                        let k = j - i;
                        for v in i * n..(i + 1) * n {
                            vn_adj[v * dv + k] = cn_base + perm[e] / dc as u32;
                            e += 1;
                        }
                    }
                }
                CnAssignment::Uniform => {
                    for i in first_vn_pos..=last_vn_pos {
                        let k = j - i;
                        for v in i * n..(i + 1) * n {
                            vn_adj[v * dv + k] = cn_base + rng.random_range(0..m as u32);
                        }
                    }
                }
            }
        }
        TannerGraph { params, vn_adj }
    }

    /// Builds a graph from an explicit edge list, checking the per-VN
    /// structure (one edge into each of its allowed CN positions at most).
    pub fn from_edges(params: EnsembleParams, edges: &[(usize, usize)]) -> Result<Self> {
        params.validate()?;
        let dv = params.dv;
        let mut vn_adj = vec![NO_EDGE; params.n_vns() * dv];
        for &(v, c) in edges {
            if v >= params.n_vns() || c >= params.n_cns() {
                return Err(Error::InvalidParams(format!("edge ({v}, {c}) out of range")));
            }
            let vp = v / params.n;
            let cp = c / params.m();
            if cp < vp || cp - vp >= dv {
                return Err(Error::InvalidParams(format!(
                    "edge ({v}, {c}) joins VN position {vp} to CN position {cp}"
                )));
            }
            let slot = &mut vn_adj[v * dv + (cp - vp)];
            if *slot != NO_EDGE {
                return Err(Error::InvalidParams(format!(
                    "VN {v} has two edges into CN position {cp}"
                )));
            }
            *slot = c as u32;
        }
        Ok(TannerGraph { params, vn_adj })
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn n_vns(&self) -> usize {
        self.params.n_vns()
    }

    pub fn n_cns(&self) -> usize {
        self.params.n_cns()
    }

    #[inline]
    pub fn vn_position(&self, v: usize) -> usize {
        v / self.params.n
    }

    #[inline]
    pub fn cn_position(&self, c: usize) -> usize {
        c / self.params.m()
    }

    /// Raw edge slots of `v` (may contain [`NO_EDGE`]).
    #[inline]
    pub fn vn_slots(&self, v: usize) -> &[u32] {
        let dv = self.params.dv;
        &self.vn_adj[v * dv..(v + 1) * dv]
    }

    pub fn vn_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.vn_slots(v).iter().filter(|&&c| c != NO_EDGE).map(|&c| c as usize)
    }

    pub fn vn_degree(&self, v: usize) -> usize {
        self.vn_slots(v).iter().filter(|&&c| c != NO_EDGE).count()
    }

    pub fn n_edges(&self) -> usize {
        self.vn_adj.iter().filter(|&&c| c != NO_EDGE).count()
    }

    /// All edges as `(vn, cn)` pairs, VN-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let dv = self.params.dv;
        self.vn_adj
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != NO_EDGE)
            .map(move |(s, &c)| (s / dv, c as usize))
    }

    pub fn cn_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n_cns()];
        for &c in &self.vn_adj {
            if c != NO_EDGE {
                deg[c as usize] += 1;
            }
        }
        deg
    }

    pub fn cn_adjacency(&self) -> CnAdjacency {
        let deg = self.cn_degrees();
        let mut offsets = Vec::with_capacity(deg.len() + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + *d as usize);
        }
        let mut fill = offsets.clone();
        let mut vns = vec![0u32; *offsets.last().unwrap()];
        for (v, c) in self.edges() {
            vns[fill[c]] = v as u32;
            fill[c] += 1;
        }
        CnAdjacency { offsets, vns }
    }

    /// VN and CN counts per position, `(vns[L], cns[P])`.
    pub fn per_position_counts(&self) -> (Vec<usize>, Vec<usize>) {
        (
            vec![self.params.n; self.params.l],
            vec![self.params.m(); self.params.cn_positions()],
        )
    }

    /// Writes the plain-text edge list: a `dv dc L N kind` header, then one
    /// zero-based `vn cn` pair per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.params;
        writeln!(w, "{} {} {} {} {}", p.dv, p.dc, p.l, p.n, p.kind)?;
        for (v, c) in self.edges() {
            writeln!(w, "{v} {c}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::Parse { line: 1, msg: "expected `dv dc L N kind`".into() });
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse { line: 1, msg: format!("`{s}`: {e}") })
        };
        let params = EnsembleParams::new(num(f[0])?, num(f[1])?, num(f[2])?, num(f[3])?, f[4].parse()?)?;
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(v)), Some(Ok(c)), None) => edges.push((v, c)),
                _ => {
                    return Err(Error::Parse { line: i + 1, msg: format!("bad edge `{line}`") })
                }
            }
        }
        Self::from_edges(params, &edges)
    }
}

/// Channel output under the all-zero codeword: which VNs were erased.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasurePattern {
    pub erased: Vec<bool>,
    pub epsilon: f64,
}

impl ErasurePattern {
    pub fn none(n_vns: usize) -> Self {
        ErasurePattern { erased: vec![false; n_vns], epsilon: 0.0 }
    }

    pub fn from_flags(erased: Vec<bool>, epsilon: f64) -> Self {
        ErasurePattern { erased, epsilon }
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn count(&self) -> usize {
        self.erased.iter().filter(|&&e| e).count()
    }
}

/// Erases each of `n_vns` VNs independently with probability `epsilon`.
pub fn sample_erasures(n_vns: usize, epsilon: f64, seed: u64) -> Result<ErasurePattern> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let mut rng = rng_from(derive_seed(seed, &[0x6572_6173_65]));
    let erased = (0..n_vns).map(|_| rng.random::<f64>() < epsilon).collect();
    Ok(ErasurePattern { erased, epsilon })
}

/// Shorthand for [`TannerGraph::sample`].
pub fn sample_graph(params: EnsembleParams, seed: u64) -> Result<TannerGraph> {
    TannerGraph::sample(params, seed)
}
