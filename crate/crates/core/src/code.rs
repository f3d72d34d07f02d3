//! (n, k, W) code templates.
//!
//! A code is `n - k` shift-invariant parity checks over `n` streams. Check
//! `i` has exactly one tap per stream, at delay `d[i][j]` in `0..W`, i.e. the
//! parity-check matrix entry is the monomial `D^d[i][j]`. The whole code is
//! the delay matrix.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use sha2::{Digest, Sha256};

use crate::error::{Error, Location, Result};
use crate::seed::{self, PRNG_NAME};

pub const FORMAT_MAGIC: &str = "ticc";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    n: usize,
    k: usize,
    w: u32,
    /// Row-major `(n - k) x n`.
    delays: Vec<u32>,
    seed: Option<u64>,
    prng: Option<String>,
}

/// Offset from tap `j` to tap `j'` of the same check: `(j' - j, d[j'] - d[j])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffVector {
    pub stream_delta: i64,
    pub time_delta: i64,
}

fn check_params(n: usize, k: usize, w: u32) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameters(format!(
            "need 0 < k < n, got n={n} k={k}"
        )));
    }
    if w < 1 {
        return Err(Error::InvalidParameters("need w >= 1".into()));
    }
    Ok(())
}

impl CodeSpec {
    /// Build from explicit rows; `rows.len()` must be `n - k` and each row `n` long.
    pub fn new(n: usize, k: usize, w: u32, rows: &[Vec<u32>]) -> Result<Self> {
        check_params(n, k, w)?;
        if rows.len() != n - k {
            return Err(Error::InvalidParameters(format!(
                "expected {} check rows, got {}",
                n - k,
                rows.len()
            )));
        }
        let mut delays = Vec::with_capacity(n * (n - k));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameters(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(&d) = row.iter().find(|&&d| d >= w) {
                return Err(Error::InvalidParameters(format!(
                    "row {i}: delay {d} outside 0..{w}"
                )));
            }
            delays.extend_from_slice(row);
        }
        Ok(CodeSpec {
            n,
            k,
            w,
            delays,
            seed: None,
            prng: None,
        })
    }

    /// Draw every delay independently and uniformly from `0..w`.
    pub fn sample(n: usize, k: usize, w: u32, seed: u64) -> Result<Self> {
        check_params(n, k, w)?;
        let mut rng = seed::rng(seed);
        let delays = (0..n * (n - k)).map(|_| rng.random_range(0..w)).collect();
        Ok(CodeSpec {
            n,
            k,
            w,
            delays,
            seed: Some(seed),
            prng: Some(PRNG_NAME.to_string()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    /// Number of check types, `n - k`.
    pub fn checks(&self) -> usize {
        self.n - self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn prng(&self) -> Option<&str> {
        self.prng.as_deref()
    }

    /// Attach (or clear) provenance metadata.
    pub fn with_provenance(mut self, seed: Option<u64>, prng: Option<String>) -> Self {
        self.seed = seed;
        self.prng = prng;
        self
    }

    /// Delay of check `i` (0-based) on stream index `j` (0-based).
    #[inline]
    pub fn delay(&self, i: usize, j: usize) -> u32 {
        self.delays[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.delays[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.delays.chunks_exact(self.n)
    }

    /// Memory `M`: the largest delay.
    pub fn memory(&self) -> u32 {
        self.delays.iter().copied().max().unwrap_or(0)
    }

    /// Constraint length: sum over checks of each check's largest delay.
    pub fn constraint_length(&self) -> u64 {
        self.rows()
            .map(|r| u64::from(r.iter().copied().max().unwrap_or(0)))
            .sum()
    }

    /// `max_j d[i][j] - min_j d[i][j]`.
    pub fn spread(&self, i: usize) -> u32 {
        let r = self.row(i);
        r.iter().max().unwrap() - r.iter().min().unwrap()
    }

    /// Bits needed to describe the code, `n (n-k) log2 W`.
    pub fn description_bits(&self) -> f64 {
        (self.n * self.checks()) as f64 * f64::from(self.w).log2()
    }

    /// All `(check, v_{j -> j'})` for ordered pairs `j != j'`, check-major.
    pub fn diff_vectors(&self) -> Vec<(usize, DiffVector)> {
        let mut out = Vec::with_capacity(self.checks() * self.n * (self.n - 1));
        for (i, row) in self.rows().enumerate() {
            for (j, &dj) in row.iter().enumerate() {
                for (jp, &djp) in row.iter().enumerate() {
                    if j != jp {
                        out.push((
                            i,
                            DiffVector {
                                stream_delta: jp as i64 - j as i64,
                                time_delta: i64::from(djp) - i64::from(dj),
                            },
                        ));
                    }
                }
            }
        }
        out
    }

    /// True iff no difference vector repeats, across all checks.
    pub fn has_distinct_vectors(&self) -> bool {
        let vectors = self.diff_vectors();
        let mut seen = HashSet::with_capacity(vectors.len());
        vectors.into_iter().all(|(_, v)| seen.insert(v))
    }

    /// Pairs of check rows (0-based, `a < b`) with identical delays.
    pub fn identical_rows(&self) -> Vec<(usize, usize)> {
        let c = self.checks();
        let mut out = Vec::new();
        for a in 0..c {
            for b in a + 1..c {
                if self.row(a) == self.row(b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Short content hash of `(n, k, w, delays)`; provenance is not hashed.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{} {} {}\n", self.n, self.k, self.w));
        for row in self.rows() {
            for d in row {
                h.update(d.to_le_bytes());
            }
        }
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{FORMAT_MAGIC} {FORMAT_VERSION}")?;
        let seed = self.seed.map_or_else(|| "-".to_string(), |s| s.to_string());
        let prng = self.prng.as_deref().unwrap_or("-");
        writeln!(f, "{} {} {} {} {}", self.n, self.k, self.w, seed, prng)?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut col = 0;
    let mut start_col = 0;
    for (byte, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((start_col, &line[s..byte]));
            }
        } else if start.is_none() {
            start = Some(byte);
            start_col = col;
        }
    }
    if let Some(s) = start {
        out.push((start_col, &line[s..]));
    }
    out
}

fn err(line: usize, column: usize, msg: impl Into<String>) -> Error {
    Error::Parse(Location { line, column }, msg.into())
}

fn num<T: FromStr>(line: usize, (col, tok): (usize, &str), what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| err(line, col, format!("expected {what}, found `{tok}`")))
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| {
                let t = l.trim_start();
                !t.is_empty() && !t.starts_with('#')
            });

        let (ln, magic) = lines.next().ok_or_else(|| err(1, 1, "empty input"))?;
        let toks = tokens(magic);
        match toks.as_slice() {
            [(_, m), v] if *m == FORMAT_MAGIC => {
                let version: u32 = num(ln, *v, "format version")?;
                if version != FORMAT_VERSION {
                    return Err(err(ln, v.0, format!("unsupported version {version}")));
                }
            }
            _ => {
                return Err(err(
                    ln,
                    1,
                    format!("expected `{FORMAT_MAGIC} {FORMAT_VERSION}` header"),
                ))
            }
        }

        let (ln, header) = lines
            .next()
            .ok_or_else(|| err(ln + 1, 1, "missing `n k w seed prng` line"))?;
        let toks = tokens(header);
        if toks.len() < 3 || toks.len() > 5 {
            return Err(err(ln, 1, "expected `n k w [seed|-] [prng|-]`"));
        }
        let n: usize = num(ln, toks[0], "n")?;
        let k: usize = num(ln, toks[1], "k")?;
        let w: u32 = num(ln, toks[2], "w")?;
        check_params(n, k, w).map_err(|e| err(ln, 1, e.to_string()))?;
        let seed = match toks.get(3) {
            None | Some((_, "-")) => None,
            Some(&t) => Some(num::<u64>(ln, t, "seed or `-`")?),
        };
        let prng = match toks.get(4) {
            None | Some((_, "-")) => None,
            Some((_, p)) => Some(p.to_string()),
        };

        let c = n - k;
        let mut delays = Vec::with_capacity(n * c);
        let mut last = ln;
        for row in 0..c {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| err(last + 1, 1, format!("expected {c} delay rows, found {row}")))?;
            last = ln;
            let toks = tokens(line);
            if toks.len() != n {
                let col = toks.get(n).map_or(line.chars().count() + 1, |t| t.0);
                return Err(err(
                    ln,
                    col,
                    format!("expected {n} delays, found {}", toks.len()),
                ));
            }
            for t in toks {
                let d: u32 = num(ln, t, "delay")?;
                if d >= w {
                    return Err(err(ln, t.0, format!("delay {d} outside 0..{w}")));
                }
                delays.push(d);
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(
                ln,
                1,
                format!("unexpected extra row beyond {c} checks"),
            ));
        }
        Ok(CodeSpec {
            n,
            k,
            w,
            delays,
            seed,
            prng,
        })
    }
}
