//! Capacitated networks, multicast sessions and their minimal subtrees.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rational;

/// Upper bound on edges; edge sets are stored as a 64-bit mask.
pub const MAX_EDGES: usize = 64;

/// A set of edge ids (1-based) stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet(pub u64);

impl EdgeSet {
    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> Self {
        EdgeSet(ids.into_iter().fold(0u64, |m, id| m | (1u64 << (id - 1))))
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0 >> (id - 1) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Edge ids in increasing order.
    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.0;
        (0..64).filter(move |b| mask >> b & 1 == 1).map(|b| b + 1)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.ids().collect()
    }
}

impl PartialOrd for EdgeSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeSet {
    /// Lexicographic on the sorted id lists.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_vec().cmp(&other.to_vec())
    }
}

impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.ids().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub capacity: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    pub directed: bool,
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    pub id: String,
    pub source: usize,
    pub destinations: BTreeSet<usize>,
}

/// A minimal subtree carrying flow for one session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subtree {
    pub session_id: String,
    pub edges: EdgeSet,
}

/// Canonical session label: `1->2` for unicast, `1->{2,3}` for multicast.
pub fn session_label(source: usize, destinations: &BTreeSet<usize>) -> String {
    if destinations.len() == 1 {
        format!("{}->{}", source, destinations.iter().next().unwrap())
    } else {
        let d: Vec<String> = destinations.iter().map(|v| v.to_string()).collect();
        format!("{}->{{{}}}", source, d.join(","))
    }
}

impl Session {
    pub fn new(source: usize, destinations: impl IntoIterator<Item = usize>) -> Self {
        let destinations: BTreeSet<usize> = destinations.into_iter().collect();
        Session {
            id: session_label(source, &destinations),
            source,
            destinations,
        }
    }

    pub fn with_id(id: impl Into<String>, source: usize, destinations: impl IntoIterator<Item = usize>) -> Self {
        Session {
            id: id.into(),
            source,
            destinations: destinations.into_iter().collect(),
        }
    }

    pub fn is_unicast(&self) -> bool {
        self.destinations.len() == 1
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.source).chain(self.destinations.iter().copied())
    }
}

impl Network {
    pub fn new(directed: bool, vertex_count: usize, edges: Vec<(usize, usize, Rational)>) -> Result<Self> {
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(i, (tail, head, capacity))| Edge {
                id: i + 1,
                tail,
                head,
                capacity,
            })
            .collect();
        let net = Network {
            directed,
            vertex_count,
            edges,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id - 1]
    }

    pub fn capacities(&self) -> Vec<Rational> {
        self.edges.iter().map(|e| e.capacity.clone()).collect()
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::from_ids(1..=self.edge_count())
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertex_count == 0 {
            return Err(Error::Validation("network needs at least one vertex".into()));
        }
        if self.edges.len() > MAX_EDGES {
            return Err(Error::Validation(format!(
                "at most {MAX_EDGES} edges are supported, got {}",
                self.edges.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.id != i + 1 {
                return Err(Error::Validation(format!(
                    "edge ids must be 1..|E| in order; position {} has id {}",
                    i + 1,
                    e.id
                )));
            }
            for v in [e.tail, e.head] {
                if v == 0 || v > self.vertex_count {
                    return Err(Error::Validation(format!("edge {} uses unknown vertex {v}", e.id)));
                }
            }
            if e.tail == e.head {
                return Err(Error::Validation(format!("edge {} is a self-loop", e.id)));
            }
            if e.capacity.is_negative() {
                return Err(Error::Validation(format!("edge {} has negative capacity", e.id)));
            }
            let key = if self.directed {
                (e.tail, e.head)
            } else {
                (e.tail.min(e.head), e.tail.max(e.head))
            };
            if !seen.insert(key) {
                return Err(Error::Validation(format!("edge {} duplicates an earlier edge", e.id)));
            }
        }
        Ok(())
    }

    /// Vertices reachable from `source` (following edge direction when directed).
    pub fn reachable_from(&self, source: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([source]);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for e in &self.edges {
                let next = if e.tail == u {
                    Some(e.head)
                } else if !self.directed && e.head == u {
                    Some(e.tail)
                } else {
                    None
                };
                if let Some(v) = next {
                    if seen.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
        }
        seen
    }

    pub fn validate_session(&self, s: &Session) -> Result<()> {
        if s.destinations.is_empty() {
            return Err(Error::Validation(format!("session {} has no destinations", s.id)));
        }
        for v in s.terminals() {
            if v == 0 || v > self.vertex_count {
                return Err(Error::Validation(format!("session {} uses unknown vertex {v}", s.id)));
            }
        }
        if s.destinations.contains(&s.source) {
            return Err(Error::Validation(format!("session {} lists its source as a destination", s.id)));
        }
        let reach = self.reachable_from(s.source);
        if let Some(v) = s.destinations.iter().find(|v| !reach.contains(v)) {
            return Err(Error::Validation(format!(
                "session {}: destination {v} is unreachable from source {}",
                s.id, s.source
            )));
        }
        Ok(())
    }

    /// True for an undirected ring with the standard labelling: edge `i`
    /// joins `i` and `i+1`, edge `|E|` joins `|E|` and 1.
    pub fn is_ring(&self) -> bool {
        let n = self.edge_count();
        if self.directed || n < 3 || self.vertex_count != n {
            return false;
        }
        self.edges.iter().all(|e| {
            let (a, b) = (e.id, if e.id == n { 1 } else { e.id + 1 });
            (e.tail == a && e.head == b) || (e.tail == b && e.head == a)
        })
    }
}

/// Independent check of the subtree invariants for a session.
pub fn is_minimal_subtree(net: &Network, s: &Session, edges: EdgeSet) -> bool {
    if edges.is_empty() {
        return false;
    }
    let n = net.vertex_count;
    let mut touched = vec![false; n + 1];
    let mut indeg = vec![0usize; n + 1];
    let mut outdeg = vec![0usize; n + 1];
    let mut deg = vec![0usize; n + 1];
    for id in edges.ids() {
        if id > net.edge_count() {
            return false;
        }
        let e = net.edge(id);
        touched[e.tail] = true;
        touched[e.head] = true;
        outdeg[e.tail] += 1;
        indeg[e.head] += 1;
        deg[e.tail] += 1;
        deg[e.head] += 1;
    }
    let vcount = touched.iter().filter(|t| **t).count();
    if edges.len() + 1 != vcount {
        return false;
    }
    if s.terminals().any(|v| !touched[v]) {
        return false;
    }
    // connectivity (from source, respecting direction when directed)
    let mut seen = vec![false; n + 1];
    seen[s.source] = true;
    let mut stack = vec![s.source];
    while let Some(u) = stack.pop() {
        for id in edges.ids() {
            let e = net.edge(id);
            let next = if e.tail == u {
                Some(e.head)
            } else if !net.directed && e.head == u {
                Some(e.tail)
            } else {
                None
            };
            if let Some(v) = next {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    if (1..=n).any(|v| touched[v] && !seen[v]) {
        return false;
    }
    let is_terminal = |v: usize| v == s.source || s.destinations.contains(&v);
    if net.directed {
        if indeg[s.source] != 0 {
            return false;
        }
        (1..=n).all(|v| !touched[v] || outdeg[v] > 0 || s.destinations.contains(&v))
    } else {
        (1..=n).all(|v| !touched[v] || deg[v] != 1 || is_terminal(v))
    }
}

struct Enumerator<'a> {
    net: &'a Network,
    session: &'a Session,
    found: Vec<EdgeSet>,
}

impl Enumerator<'_> {
    fn root(parent: &[usize], mut v: usize) -> usize {
        while parent[v] != v {
            v = parent[v];
        }
        v
    }

    /// Include/exclude recursion over edges in id order. Partial selections
    /// stay acyclic (undirected) or keep in-degree <= 1 off the source (directed).
    fn visit(&mut self, next: usize, chosen: EdgeSet, parent: &mut Vec<usize>, indeg: &mut Vec<u8>) {
        if next > self.net.edge_count() {
            if is_minimal_subtree(self.net, self.session, chosen) {
                self.found.push(chosen);
            }
            return;
        }
        let e = self.net.edge(next);
        let can_take = if self.net.directed {
            e.head != self.session.source && indeg[e.head] == 0
        } else {
            Self::root(parent, e.tail) != Self::root(parent, e.head)
        };
        if can_take {
            if self.net.directed {
                indeg[e.head] += 1;
                self.visit(next + 1, EdgeSet(chosen.0 | 1 << (next - 1)), parent, indeg);
                indeg[e.head] -= 1;
            } else {
                let a = Self::root(parent, e.tail);
                parent[a] = Self::root(parent, e.head);
                self.visit(next + 1, EdgeSet(chosen.0 | 1 << (next - 1)), parent, indeg);
                parent[a] = a;
            }
        }
        self.visit(next + 1, chosen, parent, indeg);
    }
}

/// Edge sets of all minimal subtrees for `s`, sorted by edge-id list.
pub fn enumerate_subtree_edges(net: &Network, s: &Session) -> Vec<EdgeSet> {
    let mut en = Enumerator {
        net,
        session: s,
        found: Vec::new(),
    };
    let mut parent: Vec<usize> = (0..=net.vertex_count).collect();
    let mut indeg = vec![0u8; net.vertex_count + 1];
    en.visit(1, EdgeSet(0), &mut parent, &mut indeg);
    let mut found = en.found;
    found.sort();
    found
}

pub fn enumerate_subtrees(net: &Network, s: &Session) -> Vec<Subtree> {
    enumerate_subtree_edges(net, s)
        .into_iter()
        .map(|edges| Subtree {
            session_id: s.id.clone(),
            edges,
        })
        .collect()
}

/// Every contiguous arc of a ring with length `1..|E|-1`.
pub fn enumerate_arc_intervals(net: &Network) -> Result<Vec<EdgeSet>> {
    if !net.is_ring() {
        return Err(Error::InvalidArgument("arc intervals are only defined on rings".into()));
    }
    let n = net.edge_count();
    let mut arcs = Vec::with_capacity(n * (n - 1));
    for start in 1..=n {
        for len in 1..n {
            arcs.push(EdgeSet::from_ids((0..len).map(|k| (start - 1 + k) % n + 1)));
        }
    }
    Ok(arcs)
}

/// A network with its validated sessions and their subtree lists.
#[derive(Clone, Debug)]
pub struct Problem {
    pub network: Network,
    pub sessions: Vec<Session>,
    pub subtrees: Vec<Vec<EdgeSet>>,
}

impl Problem {
    pub fn new(network: Network, sessions: Vec<Session>) -> Result<Self> {
        network.validate()?;
        let mut ids = BTreeSet::new();
        for s in &sessions {
            network.validate_session(s)?;
            if !ids.insert(s.id.clone()) {
                return Err(Error::Validation(format!("duplicate session id {}", s.id)));
            }
        }
        let subtrees = sessions
            .iter()
            .map(|s| enumerate_subtree_edges(&network, s))
            .collect();
        Ok(Problem {
            network,
            sessions,
            subtrees,
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (net, sessions) = load_network(text)?;
        Problem::new(net, sessions)
    }

    pub fn edge_count(&self) -> usize {
        self.network.edge_count()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }

    pub fn session_index(&self, id: &str) -> Option<usize> {
        self.sessions.iter().position(|s| s.id == id)
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.iter().map(|s| s.id.clone()).collect()
    }

    /// Same network, different capacities.
    pub fn with_capacities(&self, capacities: &[Rational]) -> Result<Self> {
        if capacities.len() != self.edge_count() {
            return Err(Error::InvalidArgument("capacity vector length differs from |E|".into()));
        }
        let mut p = self.clone();
        for (e, c) in p.network.edges.iter_mut().zip(capacities) {
            e.capacity = c.clone();
        }
        p.network.validate()?;
        Ok(p)
    }

    pub fn to_document(&self) -> String {
        network_document(&self.network, &self.sessions)
    }
}

#[derive(Deserialize, Serialize)]
struct SessionDoc {
    id: String,
    source: usize,
    destinations: Vec<usize>,
}

#[derive(Deserialize, Serialize)]
struct NetworkDoc {
    directed: bool,
    vertices: usize,
    #[serde(default)]
    edges: Vec<Edge>,
    #[serde(default)]
    sessions: Vec<SessionDoc>,
}

/// Parses a network document (TOML) into a validated network and sessions.
pub fn load_network(text: &str) -> Result<(Network, Vec<Session>)> {
    let doc: NetworkDoc = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let net = Network {
        directed: doc.directed,
        vertex_count: doc.vertices,
        edges: doc.edges,
    };
    net.validate()?;
    let mut sessions = Vec::with_capacity(doc.sessions.len());
    for s in doc.sessions {
        let dests: BTreeSet<usize> = s.destinations.iter().copied().collect();
        if dests.len() != s.destinations.len() {
            return Err(Error::Validation(format!("session {} repeats a destination", s.id)));
        }
        let session = Session {
            id: s.id,
            source: s.source,
            destinations: dests,
        };
        net.validate_session(&session)?;
        sessions.push(session);
    }
    Ok((net, sessions))
}

pub fn network_document(net: &Network, sessions: &[Session]) -> String {
    let doc = NetworkDoc {
        directed: net.directed,
        vertices: net.vertex_count,
        edges: net.edges.clone(),
        sessions: sessions
            .iter()
            .map(|s| SessionDoc {
                id: s.id.clone(),
                source: s.source,
                destinations: s.destinations.iter().copied().collect(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("network document serializes")
}

/// Which sessions a generated ring carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionPolicy {
    /// Every source to every nonempty subset of the other vertices.
    AllMulticast,
    /// All ordered vertex pairs plus one broadcast per source.
    UnicastBroadcast,
    /// Terminal sets that are runs of adjacent vertices, any member as source.
    StringMulticast,
}

impl std::str::FromStr for SessionPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-multicast" => Ok(SessionPolicy::AllMulticast),
            "unicast+broadcast" | "unicast-broadcast" => Ok(SessionPolicy::UnicastBroadcast),
            "string-multicast" => Ok(SessionPolicy::StringMulticast),
            _ => Err(Error::InvalidArgument(format!("unknown session policy {s:?}"))),
        }
    }
}

pub fn ring_network(edge_count: usize, capacity: Rational) -> Result<Network> {
    if edge_count < 3 {
        return Err(Error::InvalidArgument("a ring needs at least 3 edges".into()));
    }
    let edges = (1..=edge_count)
        .map(|i| (i, if i == edge_count { 1 } else { i + 1 }, capacity.clone()))
        .collect();
    Network::new(false, edge_count, edges)
}

pub fn ring_sessions(edge_count: usize, policy: SessionPolicy) -> Vec<Session> {
    let n = edge_count;
    let mut out = Vec::new();
    match policy {
        SessionPolicy::AllMulticast => {
            for src in 1..=n {
                let others: Vec<usize> = (1..=n).filter(|&v| v != src).collect();
                let mut subsets: Vec<Vec<usize>> = (1u64..(1 << others.len()))
                    .map(|mask| {
                        others
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, v)| *v)
                            .collect()
                    })
                    .collect();
                subsets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
                out.extend(subsets.into_iter().map(|d| Session::new(src, d)));
            }
        }
        SessionPolicy::UnicastBroadcast => {
            for src in 1..=n {
                for dst in (1..=n).filter(|&v| v != src) {
                    out.push(Session::new(src, [dst]));
                }
            }
            if n > 2 {
                for src in 1..=n {
                    out.push(Session::new(src, (1..=n).filter(|&v| v != src)));
                }
            }
        }
        SessionPolicy::StringMulticast => {
            let mut seen = BTreeSet::new();
            for len in 2..=n {
                for start in 1..=n {
                    let run: Vec<usize> = (0..len).map(|k| (start - 1 + k) % n + 1).collect();
                    for &src in &run {
                        let dests: BTreeSet<usize> = run.iter().copied().filter(|&v| v != src).collect();
                        if seen.insert((src, dests.clone())) {
                            out.push(Session::new(src, dests));
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn ring_problem(edge_count: usize, policy: SessionPolicy, capacity: Rational) -> Result<Problem> {
    Problem::new(ring_network(edge_count, capacity)?, ring_sessions(edge_count, policy))
}

/// Undirected triangle with edges (1,2), (2,3), (3,1) and all nine sessions.
pub fn triangle_problem(capacity: Rational) -> Result<Problem> {
    let net = Network::new(
        false,
        3,
        vec![
            (1, 2, capacity.clone()),
            (2, 3, capacity.clone()),
            (3, 1, capacity),
        ],
    )?;
    let sessions = vec![
        Session::new(1, [2]),
        Session::new(2, [1]),
        Session::new(2, [3]),
        Session::new(3, [2]),
        Session::new(3, [1]),
        Session::new(1, [3]),
        Session::new(1, [2, 3]),
        Session::new(2, [1, 3]),
        Session::new(3, [1, 2]),
    ];
    Problem::new(net, sessions)
}
