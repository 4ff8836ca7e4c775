//! Pre-trained word embeddings: word2vec binary and plain-text loaders, plus
//! the cosine arithmetic everything downstream is built on.
//!
//! Tables are immutable once built and are `Sync`, so one loaded table can be
//! shared by every worker thread.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// On-disk layout of an embedding file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Binary,
    Text,
    /// Sniff the first line: an ASCII `<vocab> <dim>` header followed by a
    /// non-text payload means binary, anything else is text.
    Auto,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "bin" => Ok(Format::Binary),
            "text" | "txt" => Ok(Format::Text),
            "auto" => Ok(Format::Auto),
            other => Err(Error::Invalid(format!("unknown embedding format {other:?}"))),
        }
    }
}

/// Optional restriction on which tokens are kept while parsing. Duplicate
/// detection only covers kept tokens.
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub allow: Option<HashSet<String>>,
}

impl LoadOptions {
    pub fn allow<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LoadOptions {
            allow: Some(words.into_iter().map(Into::into).collect()),
        }
    }

    fn keeps(&self, token: &[u8]) -> bool {
        match &self.allow {
            None => true,
            Some(set) => std::str::from_utf8(token)
                .map(|t| set.contains(t) || set.contains(&t.to_lowercase()))
                .unwrap_or(false),
        }
    }
}

/// Token to dense vector mapping. Tokens are kept as raw bytes so binary
/// files round-trip exactly even when a token is not valid UTF-8.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<Box<[u8]>>,
    data: Vec<f32>,
    index: HashMap<Box<[u8]>, usize>,
    source_label: String,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` pairs, applying the same
    /// validation as the parsers.
    pub fn from_entries<I, S>(dim: usize, entries: I, source_label: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: AsRef<[u8]>,
    {
        let mut builder = Builder::new(dim, source_label.into())?;
        for (i, (token, vector)) in entries.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: vector.len(),
                });
            }
            builder.push(token.as_ref(), &vector, i as u64)?;
        }
        builder.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    /// Exact-match lookup of the lowercased query, falling back to the query
    /// as given.
    pub fn lookup(&self, token: &str) -> Option<&[f32]> {
        let lower = token.to_lowercase();
        self.get_bytes(lower.as_bytes())
            .or_else(|| self.get_bytes(token.as_bytes()))
    }

    /// Lookup without case folding.
    pub fn get_bytes(&self, token: &[u8]) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup(token).is_some()
    }

    /// Entries in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u8], &[f32])> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .map(move |(i, t)| (&t[..], self.row(i)))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (token, vector) in self.iter() {
            out.write_all(token)?;
            out.write_all(b" ")?;
            for x in vector {
                out.write_all(&x.to_le_bytes())?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for (token, vector) in self.iter() {
            out.write_all(token)?;
            for x in vector {
                write!(out, " {x}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

struct Builder {
    dim: usize,
    tokens: Vec<Box<[u8]>>,
    data: Vec<f32>,
    index: HashMap<Box<[u8]>, usize>,
    source_label: String,
}

impl Builder {
    fn new(dim: usize, source_label: String) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedHeader("dimension must be positive".into()));
        }
        Ok(Builder {
            dim,
            tokens: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
            source_label,
        })
    }

    fn push(&mut self, token: &[u8], vector: &[f32], offset: u64) -> Result<()> {
        if token.is_empty() {
            return Err(Error::Truncated {
                offset,
                detail: "empty token".into(),
            });
        }
        if let Some(pos) = vector.iter().position(|x| !x.is_finite()) {
            return Err(Error::Truncated {
                offset,
                detail: format!(
                    "non-finite component {pos} for token {:?}",
                    String::from_utf8_lossy(token)
                ),
            });
        }
        let key: Box<[u8]> = token.into();
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateToken {
                token: String::from_utf8_lossy(token).into_owned(),
                offset,
            });
        }
        self.index.insert(key.clone(), self.tokens.len());
        self.tokens.push(key);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    fn finish(self) -> Result<EmbeddingTable> {
        Ok(EmbeddingTable {
            dim: self.dim,
            tokens: self.tokens,
            data: self.data,
            index: self.index,
            source_label: self.source_label,
        })
    }
}

/// Byte reader that tracks its absolute offset for error reporting.
struct Counting<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> Counting<R> {
    fn peek(&mut self) -> std::io::Result<Option<u8>> {
        Ok(self.inner.fill_buf()?.first().copied())
    }

    fn bump(&mut self) {
        self.inner.consume(1);
        self.offset += 1;
    }

    fn read_until(&mut self, stop: u8, buf: &mut Vec<u8>) -> std::io::Result<usize> {
        let n = self.inner.read_until(stop, buf)?;
        self.offset += n as u64;
        Ok(n)
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> std::io::Result<()> {
        self.inner.read_exact(buf)?;
        self.offset += buf.len() as u64;
        Ok(())
    }
}

fn parse_header(line: &[u8]) -> Option<(usize, usize)> {
    let text = std::str::from_utf8(line).ok()?;
    let mut parts = text.split_ascii_whitespace();
    let vocab = parts.next()?.parse().ok()?;
    let dim = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((vocab, dim))
}

/// Parses the word2vec binary layout: `"<vocab> <dim>\n"`, then per entry the
/// token bytes up to a space followed by `dim` little-endian `f32`s. A newline
/// after each float block is optional.
pub fn parse_embeddings_binary<R: Read>(
    reader: R,
    options: &LoadOptions,
    source_label: &str,
) -> Result<EmbeddingTable> {
    let mut input = Counting {
        inner: BufReader::with_capacity(1 << 20, reader),
        offset: 0,
    };
    let mut line = Vec::new();
    input.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::MalformedHeader("missing newline after header".into()));
    }
    let (vocab, dim) = parse_header(&line[..line.len() - 1]).ok_or_else(|| {
        Error::MalformedHeader(format!(
            "expected \"<vocab> <dim>\", got {:?}",
            String::from_utf8_lossy(&line).trim_end()
        ))
    })?;
    let mut builder = Builder::new(dim, source_label.to_string())?;

    let mut token = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    let mut vector = vec![0f32; dim];
    for entry in 0..vocab {
        while let Some(b'\n') = input.peek()? {
            input.bump();
        }
        let start = input.offset;
        token.clear();
        input.read_until(b' ', &mut token)?;
        if token.last() != Some(&b' ') {
            return Err(Error::Truncated {
                offset: start,
                detail: format!("entry {entry} of {vocab}: token not terminated"),
            });
        }
        token.pop();
        input.read_exact(&mut raw).map_err(|_| Error::Truncated {
            offset: start,
            detail: format!(
                "entry {entry} ({:?}): expected {} payload bytes",
                String::from_utf8_lossy(&token),
                dim * 4
            ),
        })?;
        if options.keeps(&token) {
            for (x, chunk) in vector.iter_mut().zip(raw.chunks_exact(4)) {
                *x = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            }
            builder.push(&token, &vector, start)?;
        }
    }
    builder.finish()
}

/// Parses whitespace-separated text embeddings, one `token x1 .. xd` entry
/// per line. Dimension comes from the first entry. A leading word2vec-style
/// `<vocab> <dim>` line is skipped.
pub fn parse_embeddings_text<R: Read>(
    reader: R,
    options: &LoadOptions,
    source_label: &str,
) -> Result<EmbeddingTable> {
    let reader = BufReader::with_capacity(1 << 20, reader);
    let mut builder: Option<Builder> = None;
    let mut header: Option<(usize, usize)> = None;
    let mut vector = Vec::new();
    let mut offset = 0u64;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_offset = offset;
        offset += line.len() as u64 + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let token = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();

        if builder.is_none() && header.is_none() && lineno == 0 {
            if let Some(h) = parse_header(trimmed.as_bytes()) {
                header = Some(h);
                continue;
            }
        }
        let dim = match &builder {
            Some(b) => b.dim,
            None => {
                if let Some((_, d)) = header {
                    if d != rest.len() {
                        return Err(Error::BadLine {
                            line: lineno + 1,
                            detail: format!("header says dim {d}, entry has {}", rest.len()),
                        });
                    }
                }
                builder = Some(Builder::new(rest.len(), source_label.to_string()).map_err(|_| {
                    Error::BadLine {
                        line: lineno + 1,
                        detail: "entry has no components".into(),
                    }
                })?);
                rest.len()
            }
        };
        if rest.len() != dim {
            return Err(Error::BadLine {
                line: lineno + 1,
                detail: format!("expected {dim} components, found {}", rest.len()),
            });
        }
        let builder = builder.as_mut().expect("builder initialised above");
        if !options.keeps(token.as_bytes()) {
            continue;
        }
        vector.clear();
        for field in &rest {
            let x: f32 = field.parse().map_err(|_| Error::BadLine {
                line: lineno + 1,
                detail: format!("non-numeric component {field:?}"),
            })?;
            vector.push(x);
        }
        builder.push(token.as_bytes(), &vector, line_offset).map_err(|e| match e {
            Error::Truncated { detail, .. } => Error::BadLine {
                line: lineno + 1,
                detail,
            },
            other => other,
        })?;
    }
    match builder {
        Some(b) => b.finish(),
        None => Err(Error::NoEntries),
    }
}

/// Decides binary vs text from the start of a file.
pub fn sniff_format(prefix: &[u8]) -> Format {
    let Some(nl) = prefix.iter().position(|&b| b == b'\n') else {
        return Format::Text;
    };
    let Some((_, dim)) = parse_header(&prefix[..nl]) else {
        return Format::Text;
    };
    let rest = &prefix[nl + 1..];
    let first = match rest.iter().position(|&b| b == b'\n') {
        Some(end) => &rest[..end],
        None => rest,
    };
    let looks_text = std::str::from_utf8(first).is_ok_and(|line| {
        let fields: Vec<&str> = line.split_whitespace().collect();
        fields.len() == dim + 1 && fields[1..].iter().all(|f| f.parse::<f32>().is_ok())
    });
    if looks_text {
        Format::Text
    } else {
        Format::Binary
    }
}

/// Loads an embedding file from disk.
pub fn load(path: &Path, format: Format, options: &LoadOptions) -> Result<EmbeddingTable> {
    let label = path.display().to_string();
    let open = || File::open(path).map_err(|e| Error::io(path, e));
    let format = match format {
        Format::Auto => {
            let mut prefix = Vec::with_capacity(1 << 16);
            open()?
                .take(1 << 16)
                .read_to_end(&mut prefix)
                .map_err(|e| Error::io(path, e))?;
            sniff_format(&prefix)
        }
        f => f,
    };
    log::info!("loading {format:?} embeddings from {label}");
    match format {
        Format::Binary => parse_embeddings_binary(open()?, options, &label),
        _ => parse_embeddings_text(open()?, options, &label),
    }
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x.into(), y.into());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}
