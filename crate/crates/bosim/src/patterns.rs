//! Photon configurations: no-collision input combinations, multiset outputs,
//! their lexicographic enumeration and ranking. Ports are 1-based throughout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupied input ports, strictly ascending, no repeats.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InputPattern {
    ports: Vec<usize>,
}

/// Output port multiset, ascending, repeats allowed (collision modes).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutputPattern {
    ports: Vec<usize>,
}

impl InputPattern {
    pub fn new(ports: Vec<usize>) -> Result<Self> {
        if ports.iter().any(|&p| p == 0) {
            return Err(Error::InvalidPattern("ports are 1-based".into()));
        }
        if !ports.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidPattern(format!(
                "input ports must be strictly ascending: {ports:?}"
            )));
        }
        Ok(Self { ports })
    }

    pub fn ports(&self) -> &[usize] {
        &self.ports
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn max_port(&self) -> usize {
        self.ports.last().copied().unwrap_or(0)
    }

    /// All size-k sub-patterns in lexicographic order.
    pub fn sub_patterns(&self, k: usize) -> Vec<InputPattern> {
        combinations(self.ports.len(), k)
            .into_iter()
            .map(|idx| InputPattern {
                ports: idx.iter().map(|&i| self.ports[i]).collect(),
            })
            .collect()
    }

    pub fn to_output_pattern(&self) -> OutputPattern {
        OutputPattern {
            ports: self.ports.clone(),
        }
    }
}

impl OutputPattern {
    pub fn new(mut ports: Vec<usize>) -> Result<Self> {
        if ports.iter().any(|&p| p == 0) {
            return Err(Error::InvalidPattern("ports are 1-based".into()));
        }
        ports.sort_unstable();
        Ok(Self { ports })
    }

    pub fn ports(&self) -> &[usize] {
        &self.ports
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn max_port(&self) -> usize {
        self.ports.last().copied().unwrap_or(0)
    }

    /// Number of photons in the given port.
    pub fn multiplicity(&self, port: usize) -> usize {
        self.ports.iter().filter(|&&p| p == port).count()
    }

    /// (port, multiplicity) pairs in ascending port order.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.ports {
            match out.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Product of multiplicity factorials, prod_j mu_j!.
    pub fn multiplicity_factorial(&self) -> f64 {
        self.multiplicities()
            .iter()
            .map(|&(_, c)| (1..=c).map(|x| x as f64).product::<f64>())
            .product()
    }

    pub fn has_collision(&self) -> bool {
        self.ports.windows(2).any(|w| w[0] == w[1])
    }
}

fn fmt_ports(ports: &[usize], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{{")?;
    for (i, p) in ports.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{p}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for InputPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ports(&self.ports, f)
    }
}

impl fmt::Display for OutputPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ports(&self.ports, f)
    }
}

fn parse_ports(s: &str) -> Result<Vec<usize>> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| Error::Parse(format!("pattern must be brace-delimited: {s:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad port {tok:?}: {e}")))
        })
        .collect()
}

impl FromStr for InputPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InputPattern::new(parse_ports(s)?)
    }
}

impl FromStr for OutputPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OutputPattern::new(parse_ports(s)?)
    }
}

/// All k-subsets of {0, .., n-1} in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Exact binomial coefficient; panics on overflow (intended for n + k <= 60).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        result = result * (n - k + i) as u128 / i as u128;
    }
    result
}

/// All C(m, n) no-collision patterns on m modes, lexicographic.
pub fn enumerate_no_collision(m: usize, n: usize) -> Result<Vec<InputPattern>> {
    if n > m || n == 0 {
        return Err(Error::InvalidPattern(format!(
            "need 1 <= n <= m, got n={n}, m={m}"
        )));
    }
    Ok(combinations(m, n)
        .into_iter()
        .map(|idx| InputPattern {
            ports: idx.iter().map(|&i| i + 1).collect(),
        })
        .collect())
}

/// All C(m+n-1, n) output multisets on m modes, lexicographic.
pub fn enumerate_multisets(m: usize, n: usize) -> Result<Vec<OutputPattern>> {
    if m == 0 {
        return Err(Error::ModeCount { m, min: 1, max: usize::MAX });
    }
    if n == 0 {
        return Ok(vec![OutputPattern { ports: Vec::new() }]);
    }
    // Multisets of size n over [1, m] biject with n-subsets of [1, m+n-1]
    // via p_i -> p_i + i; enumerate directly instead.
    let mut out = Vec::with_capacity(binomial(m + n - 1, n) as usize);
    let mut cur = vec![1usize; n];
    loop {
        out.push(OutputPattern { ports: cur.clone() });
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if cur[i] < m {
                break;
            }
            if i == 0 {
                return Ok(out);
            }
        }
        cur[i] += 1;
        for j in i + 1..n {
            cur[j] = cur[i];
        }
    }
}

/// Every multiset reachable by adding k ports (with repetition) to `detected`,
/// sorted lexicographically. k = 0 returns the detected pattern itself.
pub fn lost_port_completions(detected: &OutputPattern, m: usize, k: usize) -> Result<Vec<OutputPattern>> {
    if detected.max_port() > m {
        return Err(Error::IndexOutOfRange {
            what: "mode",
            index: detected.max_port(),
            size: m,
        });
    }
    if k == 0 {
        return Ok(vec![detected.clone()]);
    }
    let additions = enumerate_multisets(m, k)?;
    let mut out: Vec<OutputPattern> = additions
        .into_iter()
        .map(|add| {
            let mut ports = Vec::with_capacity(detected.len() + k);
            ports.extend_from_slice(detected.ports());
            ports.extend_from_slice(add.ports());
            ports.sort_unstable();
            OutputPattern { ports }
        })
        .collect();
    out.sort_unstable();
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "completions must be distinct");
    Ok(out)
}

/// Rank of a no-collision pattern within enumerate_no_collision(m, n).
pub fn rank_no_collision(m: usize, pattern: &[usize]) -> usize {
    let n = pattern.len();
    let mut rank: u128 = 0;
    let mut prev = 0usize; // last used port
    for (i, &p) in pattern.iter().enumerate() {
        for q in prev + 1..p {
            rank += binomial(m - q, n - i - 1);
        }
        prev = p;
    }
    rank as usize
}

/// Inverse of [`rank_no_collision`].
pub fn unrank_no_collision(m: usize, n: usize, mut rank: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut next = 1usize;
    for i in 0..n {
        let mut q = next;
        loop {
            let below = binomial(m - q, n - i - 1) as usize;
            if rank < below {
                out.push(q);
                next = q + 1;
                break;
            }
            rank -= below;
            q += 1;
        }
    }
    out
}
