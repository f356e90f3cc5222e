//! Device descriptions: coupling graph, per-qubit/per-pair noise tables and
//! gate durations.
//!
//! Architecture files are JSON:
//!
//! ```json
//! {
//!   "name": "bogota",
//!   "num_qubits": 5,
//!   "edges": [[0, 1], [1, 2], [2, 3], [3, 4]],
//!   "noise": {
//!     "gate_error_1q": { "*": { "q0": 2.1e-4, "q1": 3.0e-4 }, "rz": { "q0": 0.0 } },
//!     "gate_error_2q": { "cx": { "q0_q1": 8.1e-3 } },
//!     "prep_error": { "q0": 1e-3 },
//!     "meas_error": { "q0": 2.4e-2 },
//!     "t1": { "q0": 112.4 },
//!     "t2": { "q0": 151.0 }
//!   },
//!   "gate_durations": { "x": 35.5, "rz": 0.0, "cx": 320.0, "measure": 4000.0 }
//! }
//! ```
//!
//! Gate-error tables are keyed by gate mnemonic; the key `"*"` supplies a
//! fallback for every kind not listed explicitly. Pair keys are unordered.
//! T1/T2 are in microseconds and may be omitted per qubit, in which case the
//! qubit does not decohere. Durations are in nanoseconds; missing kinds use
//! [`DEFAULT_DURATION_1Q_NS`], [`DEFAULT_DURATION_2Q_NS`] and
//! [`DEFAULT_DURATION_MEASURE_NS`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::GateKind;

/// Fallback durations, used only when a file omits a gate kind.
pub const DEFAULT_DURATION_1Q_NS: f64 = 50.0;
pub const DEFAULT_DURATION_2Q_NS: f64 = 300.0;
pub const DEFAULT_DURATION_MEASURE_NS: f64 = 1000.0;

pub const WILDCARD: &str = "*";

#[derive(Debug, Error)]
pub enum ArchError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed architecture file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid architecture: {0}")]
    Invalid(String),
    #[error("missing noise parameter {param} for {target}")]
    MissingParameter { param: String, target: String },
    #[error("calibration row {row}: {msg}")]
    Calibration { row: usize, msg: String },
    #[error("unknown builtin machine `{0}`")]
    UnknownMachine(String),
}

fn invalid(msg: impl Into<String>) -> ArchError {
    ArchError::Invalid(msg.into())
}

/// Unordered physical-qubit pair, stored with the smaller index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(usize, usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Edge(a.min(b), a.max(b))
    }

    pub fn endpoints(self) -> (usize, usize) {
        (self.0, self.1)
    }

    fn key(self) -> String {
        format!("q{}_q{}", self.0, self.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

fn parse_qubit_key(key: &str) -> Option<usize> {
    key.strip_prefix('q').unwrap_or(key).parse().ok()
}

fn parse_edge_key(key: &str) -> Option<Edge> {
    let (a, b) = key.split_once('_').or_else(|| key.split_once('-'))?;
    Some(Edge::new(parse_qubit_key(a)?, parse_qubit_key(b)?))
}

/// Calibrated error rates and coherence times.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawNoise", into = "RawNoise")]
pub struct NoiseParameters {
    pub gate_error_1q: BTreeMap<String, BTreeMap<usize, f64>>,
    pub gate_error_2q: BTreeMap<String, BTreeMap<Edge, f64>>,
    pub prep_error: BTreeMap<usize, f64>,
    pub meas_error: BTreeMap<usize, f64>,
    /// Microseconds.
    pub t1: BTreeMap<usize, f64>,
    /// Microseconds.
    pub t2: BTreeMap<usize, f64>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    #[serde(default)]
    gate_error_1q: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    gate_error_2q: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    prep_error: BTreeMap<String, f64>,
    #[serde(default)]
    meas_error: BTreeMap<String, f64>,
    #[serde(default)]
    t1: BTreeMap<String, f64>,
    #[serde(default)]
    t2: BTreeMap<String, f64>,
}

fn qubit_table(
    name: &str,
    raw: BTreeMap<String, f64>,
) -> Result<BTreeMap<usize, f64>, String> {
    raw.into_iter()
        .map(|(k, v)| {
            parse_qubit_key(&k).map(|q| (q, v)).ok_or_else(|| format!("{name}: bad qubit key `{k}`"))
        })
        .collect()
}

impl TryFrom<RawNoise> for NoiseParameters {
    type Error = String;

    fn try_from(raw: RawNoise) -> Result<Self, String> {
        let gate_error_1q = raw
            .gate_error_1q
            .into_iter()
            .map(|(kind, t)| Ok((kind.to_ascii_lowercase(), qubit_table("gate_error_1q", t)?)))
            .collect::<Result<_, String>>()?;
        let gate_error_2q = raw
            .gate_error_2q
            .into_iter()
            .map(|(kind, t)| {
                let table = t
                    .into_iter()
                    .map(|(k, v)| {
                        parse_edge_key(&k)
                            .map(|e| (e, v))
                            .ok_or_else(|| format!("gate_error_2q: bad pair key `{k}`"))
                    })
                    .collect::<Result<_, String>>()?;
                Ok((kind.to_ascii_lowercase(), table))
            })
            .collect::<Result<_, String>>()?;
        Ok(NoiseParameters {
            gate_error_1q,
            gate_error_2q,
            prep_error: qubit_table("prep_error", raw.prep_error)?,
            meas_error: qubit_table("meas_error", raw.meas_error)?,
            t1: qubit_table("t1", raw.t1)?,
            t2: qubit_table("t2", raw.t2)?,
        })
    }
}

impl From<NoiseParameters> for RawNoise {
    fn from(n: NoiseParameters) -> Self {
        let qkeys = |t: BTreeMap<usize, f64>| t.into_iter().map(|(q, v)| (format!("q{q}"), v)).collect();
        RawNoise {
            gate_error_1q: n.gate_error_1q.into_iter().map(|(k, t)| (k, qkeys(t))).collect(),
            gate_error_2q: n
                .gate_error_2q
                .into_iter()
                .map(|(k, t)| (k, t.into_iter().map(|(e, v)| (e.key(), v)).collect()))
                .collect(),
            prep_error: qkeys(n.prep_error),
            meas_error: qkeys(n.meas_error),
            t1: qkeys(n.t1),
            t2: qkeys(n.t2),
        }
    }
}

fn lookup_kind<K: Ord, V: Copy>(
    tables: &BTreeMap<String, BTreeMap<K, V>>,
    kinds: &[&str],
    key: &K,
) -> Option<V> {
    kinds
        .iter()
        .chain(std::iter::once(&WILDCARD))
        .find_map(|k| tables.get(*k).and_then(|t| t.get(key)).copied())
}

impl NoiseParameters {
    /// Same rates on every qubit and pair. `coherence` is `(T1, T2)` in µs, or
    /// `None` for no decoherence.
    pub fn uniform(
        num_qubits: usize,
        edges: &[Edge],
        p1: f64,
        p2: f64,
        prep: f64,
        meas: f64,
        coherence: Option<(f64, f64)>,
    ) -> Self {
        let qubits = 0..num_qubits;
        let mut n = NoiseParameters::default();
        n.gate_error_1q.insert(WILDCARD.into(), qubits.clone().map(|q| (q, p1)).collect());
        n.gate_error_2q.insert(WILDCARD.into(), edges.iter().map(|&e| (e, p2)).collect());
        n.prep_error = qubits.clone().map(|q| (q, prep)).collect();
        n.meas_error = qubits.clone().map(|q| (q, meas)).collect();
        if let Some((t1, t2)) = coherence {
            n.t1 = qubits.clone().map(|q| (q, t1)).collect();
            n.t2 = qubits.map(|q| (q, t2)).collect();
        }
        n
    }

    /// Depolarizing probability for a one-qubit gate. `aliases` are extra
    /// table keys tried after the gate's own mnemonic and before `"*"`.
    pub fn gate_error_1q(&self, kind: GateKind, aliases: &[&str], q: usize) -> Result<f64, ArchError> {
        let kinds: Vec<&str> = std::iter::once(kind.name()).chain(aliases.iter().copied()).collect();
        lookup_kind(&self.gate_error_1q, &kinds, &q).ok_or_else(|| ArchError::MissingParameter {
            param: format!("gate_error_1q[{kind}]"),
            target: format!("q{q}"),
        })
    }

    pub fn gate_error_2q(&self, kind: GateKind, aliases: &[&str], edge: Edge) -> Result<f64, ArchError> {
        let kinds: Vec<&str> = std::iter::once(kind.name()).chain(aliases.iter().copied()).collect();
        lookup_kind(&self.gate_error_2q, &kinds, &edge).ok_or_else(|| ArchError::MissingParameter {
            param: format!("gate_error_2q[{kind}]"),
            target: edge.key(),
        })
    }

    pub fn prep(&self, q: usize) -> Result<f64, ArchError> {
        self.prep_error.get(&q).copied().ok_or_else(|| ArchError::MissingParameter {
            param: "prep_error".into(),
            target: format!("q{q}"),
        })
    }

    pub fn meas(&self, q: usize) -> Result<f64, ArchError> {
        self.meas_error.get(&q).copied().ok_or_else(|| ArchError::MissingParameter {
            param: "meas_error".into(),
            target: format!("q{q}"),
        })
    }

    /// `(T1, T2)` in µs, or `None` when the qubit has no coherence entry.
    pub fn coherence(&self, q: usize) -> Option<(f64, f64)> {
        let t1 = *self.t1.get(&q)?;
        let t2 = self.t2.get(&q).copied().unwrap_or(2.0 * t1);
        Some((t1, t2))
    }

    /// Multiplies every value by a fresh `factor()` (in a fixed traversal
    /// order), then clamps probabilities into [0, 1] and T2 to at most 2·T1.
    pub fn scaled(&self, mut factor: impl FnMut() -> f64) -> NoiseParameters {
        let mut out = self.clone();
        let mut prob = |v: &mut f64| *v = (*v * factor()).clamp(0.0, 1.0);
        out.gate_error_1q.values_mut().flat_map(|t| t.values_mut()).for_each(&mut prob);
        out.gate_error_2q.values_mut().flat_map(|t| t.values_mut()).for_each(&mut prob);
        out.prep_error.values_mut().for_each(&mut prob);
        out.meas_error.values_mut().for_each(&mut prob);
        out.t1.values_mut().for_each(|v| *v *= factor());
        out.t2.values_mut().for_each(|v| *v *= factor());
        for (q, t2) in out.t2.iter_mut() {
            if let Some(t1) = out.t1.get(q) {
                *t2 = t2.min(2.0 * t1);
            }
        }
        out
    }

    /// True when every error rate is zero and no qubit decoheres.
    pub fn is_noiseless(&self) -> bool {
        let zero = |v: &f64| *v == 0.0;
        self.gate_error_1q.values().flat_map(|t| t.values()).all(zero)
            && self.gate_error_2q.values().flat_map(|t| t.values()).all(zero)
            && self.prep_error.values().all(zero)
            && self.meas_error.values().all(zero)
            && self.t1.is_empty()
    }
}

/// A device: coupling graph plus calibration data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub name: String,
    pub num_qubits: usize,
    #[serde(with = "edge_list")]
    pub edges: BTreeSet<Edge>,
    #[serde(default)]
    pub noise: NoiseParameters,
    /// Nanoseconds, keyed by gate mnemonic.
    #[serde(default)]
    pub gate_durations: BTreeMap<String, f64>,
}

mod edge_list {
    use super::Edge;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeSet;

    pub fn serialize<S: Serializer>(edges: &BTreeSet<Edge>, s: S) -> Result<S::Ok, S::Error> {
        edges.iter().map(|e| [e.0, e.1]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeSet<Edge>, D::Error> {
        let pairs = Vec::<[usize; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[a, b]| Edge::new(a, b)).collect())
    }
}

impl ArchitectureSpec {
    /// Builds and validates.
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        noise: NoiseParameters,
    ) -> Result<Self, ArchError> {
        let spec = ArchitectureSpec {
            name: name.into(),
            num_qubits,
            edges: edges.into_iter().map(|(a, b)| Edge::new(a, b)).collect(),
            noise,
            gate_durations: BTreeMap::new(),
        };
        spec.validate()?;
        Ok(spec.normalized())
    }

    /// Noiseless, all-to-all device.
    pub fn complete(num_qubits: usize) -> Self {
        let edges: Vec<Edge> = (0..num_qubits)
            .flat_map(|a| (a + 1..num_qubits).map(move |b| Edge(a, b)))
            .collect();
        let noise = NoiseParameters::uniform(num_qubits, &edges, 0.0, 0.0, 0.0, 0.0, None);
        ArchitectureSpec {
            name: format!("complete{num_qubits}"),
            num_qubits,
            edges: edges.into_iter().collect(),
            noise,
            gate_durations: BTreeMap::new(),
        }
    }

    /// Noiseless linear chain `0 - 1 - … - n-1`.
    pub fn linear(num_qubits: usize) -> Self {
        let edges: Vec<Edge> = (1..num_qubits).map(|b| Edge(b - 1, b)).collect();
        let noise = NoiseParameters::uniform(num_qubits, &edges, 0.0, 0.0, 0.0, 0.0, None);
        ArchitectureSpec {
            name: format!("linear{num_qubits}"),
            num_qubits,
            edges: edges.into_iter().collect(),
            noise,
            gate_durations: BTreeMap::new(),
        }
    }

    pub fn with_noise(mut self, noise: NoiseParameters) -> Self {
        self.noise = noise;
        self
    }

    pub fn edge_list(&self) -> Vec<Edge> {
        self.edges.iter().copied().collect()
    }

    fn normalized(mut self) -> Self {
        self.edges = self.edges.iter().map(|e| Edge::new(e.0, e.1)).collect();
        self.gate_durations =
            self.gate_durations.into_iter().map(|(k, v)| (k.to_ascii_lowercase(), v)).collect();
        self
    }

    pub fn from_json(src: &str) -> Result<Self, ArchError> {
        let spec: ArchitectureSpec = serde_json::from_str(src)?;
        spec.validate()?;
        Ok(spec.normalized())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ArchError> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)
            .map_err(|source| ArchError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&src)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("architecture serializes")
    }

    /// Checks graph shape, key ranges, probability ranges and coherence times.
    pub fn validate(&self) -> Result<(), ArchError> {
        let n = self.num_qubits;
        if n == 0 {
            return Err(invalid("num_qubits must be positive"));
        }
        for e in &self.edges {
            if e.0 == e.1 {
                return Err(invalid(format!("self-loop on qubit {}", e.0)));
            }
            if e.0 >= n || e.1 >= n {
                return Err(invalid(format!("edge {e} out of range for {n} qubits")));
            }
        }
        if !self.is_connected() {
            return Err(invalid("coupling graph is not connected"));
        }

        let check_prob = |what: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(format!("{what} = {v} is not a probability")))
            }
        };
        let check_qubit = |what: &str, q: usize| {
            if q < n {
                Ok(())
            } else {
                Err(invalid(format!("{what} refers to qubit {q} of {n}")))
            }
        };
        let check_kind = |kind: &str| {
            if kind == WILDCARD || kind.parse::<GateKind>().is_ok() {
                Ok(())
            } else {
                Err(invalid(format!("unknown gate kind `{kind}` in noise table")))
            }
        };
        let noise = &self.noise;
        for (kind, table) in &noise.gate_error_1q {
            check_kind(kind)?;
            for (&q, &v) in table {
                check_qubit("gate_error_1q", q)?;
                check_prob(&format!("gate_error_1q[{kind}][q{q}]"), v)?;
            }
        }
        for (kind, table) in &noise.gate_error_2q {
            check_kind(kind)?;
            for (e, &v) in table {
                let e = Edge::new(e.0, e.1);
                if !self.edges.contains(&e) {
                    return Err(invalid(format!("gate_error_2q[{kind}] names non-edge {e}")));
                }
                check_prob(&format!("gate_error_2q[{kind}][{e}]"), v)?;
            }
        }
        for (what, table) in [("prep_error", &noise.prep_error), ("meas_error", &noise.meas_error)] {
            for (&q, &v) in table {
                check_qubit(what, q)?;
                check_prob(&format!("{what}[q{q}]"), v)?;
            }
        }
        for (what, table) in [("t1", &noise.t1), ("t2", &noise.t2)] {
            for (&q, &v) in table {
                check_qubit(what, q)?;
                if !(v > 0.0) {
                    return Err(invalid(format!("{what}[q{q}] = {v} must be positive")));
                }
            }
        }
        for (&q, &t2) in &noise.t2 {
            let t1 = noise
                .t1
                .get(&q)
                .ok_or_else(|| invalid(format!("t2 given for q{q} without t1")))?;
            if t2 > 2.0 * t1 * (1.0 + 1e-12) {
                return Err(invalid(format!("q{q}: T2 = {t2} exceeds 2·T1 = {}", 2.0 * t1)));
            }
        }
        for (kind, &d) in &self.gate_durations {
            check_kind(kind)?;
            if !(d >= 0.0) || !d.is_finite() {
                return Err(invalid(format!("duration of {kind} = {d} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&Edge::new(a, b))
    }

    pub fn neighbors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |e| {
            if e.0 == q {
                Some(e.1)
            } else if e.1 == q {
                Some(e.0)
            } else {
                None
            }
        })
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_qubits];
        for e in &self.edges {
            if e.0 < self.num_qubits && e.1 < self.num_qubits {
                adj[e.0].push(e.1);
                adj[e.1].push(e.0);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Breadth-first shortest path `from ..= to`, ties broken towards lower
    /// qubit indices.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        if from >= self.num_qubits || to >= self.num_qubits {
            return None;
        }
        let adj = self.adjacency();
        let mut prev = vec![usize::MAX; self.num_qubits];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &w in &adj[v] {
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    pub fn is_connected(&self) -> bool {
        (1..self.num_qubits).all(|q| self.shortest_path(0, q).is_some())
    }

    /// Duration in ns for a gate of `kind` acting on `arity` qubits.
    pub fn duration_ns(&self, kind: GateKind, arity: usize) -> f64 {
        if let Some(&d) = self.gate_durations.get(kind.name()) {
            return d;
        }
        match kind {
            GateKind::Measure => DEFAULT_DURATION_MEASURE_NS,
            _ if arity >= 2 => DEFAULT_DURATION_2Q_NS,
            _ => DEFAULT_DURATION_1Q_NS,
        }
    }

    /// Applies a calibration snapshot: CSV with header `parameter,qubits,value`
    /// where parameter is one of `gate_error_1q:<kind>`, `gate_error_2q:<kind>`,
    /// `prep_error`, `meas_error`, `t1`, `t2`, and qubits is `3`, `q3`, `0-1`
    /// or `q0_q1`. Values overwrite existing entries.
    pub fn apply_calibration(&self, reader: impl Read) -> Result<ArchitectureSpec, ArchError> {
        #[derive(Deserialize)]
        struct Row {
            parameter: String,
            qubits: String,
            value: f64,
        }
        let mut out = self.clone();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row_no = i + 2;
            let err = |msg: String| ArchError::Calibration { row: row_no, msg };
            let row = row.map_err(|e| err(e.to_string()))?;
            let qubit = || parse_qubit_key(&row.qubits).ok_or_else(|| err(format!("bad qubit `{}`", row.qubits)));
            let (param, kind) = match row.parameter.split_once(':') {
                Some((p, k)) => (p, Some(k.to_ascii_lowercase())),
                None => (row.parameter.as_str(), None),
            };
            let noise = &mut out.noise;
            match (param, kind) {
                ("gate_error_1q", Some(k)) => {
                    noise.gate_error_1q.entry(k).or_default().insert(qubit()?, row.value);
                }
                ("gate_error_2q", Some(k)) => {
                    let e = parse_edge_key(&row.qubits).ok_or_else(|| err(format!("bad pair `{}`", row.qubits)))?;
                    noise.gate_error_2q.entry(k).or_default().insert(e, row.value);
                }
                ("prep_error", None) => {
                    noise.prep_error.insert(qubit()?, row.value);
                }
                ("meas_error", None) => {
                    noise.meas_error.insert(qubit()?, row.value);
                }
                ("t1", None) => {
                    noise.t1.insert(qubit()?, row.value);
                }
                ("t2", None) => {
                    noise.t2.insert(qubit()?, row.value);
                }
                _ => return Err(err(format!("unknown parameter `{}`", row.parameter))),
            }
        }
        out.validate()?;
        Ok(out)
    }
}

const BOGOTA: &str = include_str!("../data/machines/bogota.json");
const SANTIAGO: &str = include_str!("../data/machines/santiago.json");
const CASABLANCA: &str = include_str!("../data/machines/casablanca.json");
const NOISELESS: &str = include_str!("../data/machines/noiseless.json");

/// Names accepted by [`builtin_machine`].
pub const BUILTIN_MACHINES: [&str; 4] = ["bogota", "santiago", "casablanca", "noiseless"];

/// Shipped device files. The three named machines carry representative
/// calibration values; `noiseless` has the 7-qubit H-shaped coupling map and
/// zero noise.
pub fn builtin_machine(name: &str) -> Result<ArchitectureSpec, ArchError> {
    let src = match name.to_ascii_lowercase().as_str() {
        "bogota" => BOGOTA,
        "santiago" => SANTIAGO,
        "casablanca" => CASABLANCA,
        "noiseless" => NOISELESS,
        _ => return Err(ArchError::UnknownMachine(name.to_string())),
    };
    ArchitectureSpec::from_json(src)
}
