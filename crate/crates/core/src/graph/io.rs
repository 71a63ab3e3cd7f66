//! MatrixMarket and TSV edge-list formats.
//!
//! TSV: one `u v w` triple per line with 0-based ids; `#` starts a comment.
//! A `# nodes <N>` comment fixes the node count (otherwise it is the largest
//! id plus one). MatrixMarket: `coordinate` matrices with `real`, `integer`
//! or `pattern` values and `general` or `symmetric` symmetry; ids are 1-based
//! and every stored entry is one undirected edge.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Edge, Graph, NodeId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    MatrixMarket,
    Tsv,
}

impl Format {
    /// `.mtx` / `.mm` select MatrixMarket, anything else TSV.
    pub fn from_path(path: impl AsRef<Path>) -> Self {
        match path.as_ref().extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") || ext.eq_ignore_ascii_case("mm") => {
                Format::MatrixMarket
            }
            _ => Format::Tsv,
        }
    }

    /// Sniffs the banner line; falls back to TSV.
    pub fn detect(text: &str) -> Self {
        if text.trim_start().starts_with("%%MatrixMarket") {
            Format::MatrixMarket
        } else {
            Format::Tsv
        }
    }
}

pub fn load_graph(path: impl AsRef<Path>, format: Format) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let graph = parse_graph(&text, format, &path.display().to_string())?;
    if !graph.is_connected() {
        log::warn!(
            "{}: graph has {} connected components",
            path.display(),
            graph.component_count()
        );
    }
    Ok(graph)
}

pub fn parse_graph(text: &str, format: Format, origin: &str) -> Result<Graph> {
    match format {
        Format::Tsv => parse_tsv(text, origin),
        Format::MatrixMarket => parse_matrix_market(text, origin),
    }
}

fn parse_err(origin: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        origin: origin.to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    what: &str,
    origin: &str,
    line: usize,
) -> Result<T> {
    let field = field.ok_or_else(|| parse_err(origin, line, format!("missing {what}")))?;
    field
        .parse()
        .map_err(|_| parse_err(origin, line, format!("invalid {what} `{field}`")))
}

fn to_node(id: u64, origin: &str, line: usize) -> Result<NodeId> {
    NodeId::try_from(id)
        .ok()
        .filter(|&x| x != NodeId::MAX)
        .ok_or_else(|| parse_err(origin, line, format!("node id {id} too large")))
}

fn parse_tsv(text: &str, origin: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut declared_n: Option<usize> = None;
    let mut max_id: Option<NodeId> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(comment) = comment {
            let mut words = comment.split_whitespace();
            if words.next() == Some("nodes") {
                declared_n = Some(parse_field(words.next(), "node count", origin, line_no)?);
            }
        }
        let mut fields = body.split_whitespace();
        let Some(first) = fields.next() else { continue };
        let u: u64 = parse_field(Some(first), "source id", origin, line_no)?;
        let v: u64 = parse_field(fields.next(), "target id", origin, line_no)?;
        let w: f64 = parse_field(fields.next(), "weight", origin, line_no)?;
        if fields.next().is_some() {
            return Err(parse_err(origin, line_no, "expected exactly three fields"));
        }
        let (u, v) = (to_node(u, origin, line_no)?, to_node(v, origin, line_no)?);
        max_id = max_id.max(Some(u.max(v)));
        edges.push(Edge::new(u, v, w));
    }

    let implied = max_id.map_or(0, |m| m as usize + 1);
    let n = match declared_n {
        Some(n) if n < implied => {
            return Err(Error::NodeOutOfRange {
                id: implied as u64 - 1,
                n,
            })
        }
        Some(n) => n,
        None => implied,
    };
    Graph::new(n, edges)
}

fn parse_matrix_market(text: &str, origin: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines
        .next()
        .ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let words: Vec<String> = banner
        .split_whitespace()
        .map(|w| w.to_ascii_lowercase())
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(
            origin,
            1,
            "missing `%%MatrixMarket matrix` banner",
        ));
    }
    if words[2] != "coordinate" {
        return Err(parse_err(
            origin,
            1,
            "only coordinate matrices are supported",
        ));
    }
    let pattern = match words[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(parse_err(origin, 1, format!("unsupported field `{other}`"))),
    };
    if words[4] != "general" && words[4] != "symmetric" {
        return Err(parse_err(
            origin,
            1,
            format!("unsupported symmetry `{}`", words[4]),
        ));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let Some((n, nnz)) = size else {
            let rows: usize = parse_field(fields.next(), "row count", origin, line_no)?;
            let cols: usize = parse_field(fields.next(), "column count", origin, line_no)?;
            let nnz: usize = parse_field(fields.next(), "entry count", origin, line_no)?;
            if rows != cols {
                return Err(parse_err(origin, line_no, "matrix must be square"));
            }
            size = Some((rows, nnz));
            edges.reserve(nnz);
            continue;
        };
        if edges.len() == nnz {
            return Err(parse_err(origin, line_no, "more entries than declared"));
        }
        let i1: u64 = parse_field(fields.next(), "row index", origin, line_no)?;
        let j1: u64 = parse_field(fields.next(), "column index", origin, line_no)?;
        let w: f64 = if pattern {
            1.0
        } else {
            parse_field(fields.next(), "value", origin, line_no)?
        };
        if i1 == 0 || j1 == 0 {
            return Err(parse_err(
                origin,
                line_no,
                "MatrixMarket indices are 1-based",
            ));
        }
        if i1 as usize > n || j1 as usize > n {
            return Err(Error::NodeOutOfRange {
                id: i1.max(j1) - 1,
                n,
            });
        }
        edges.push(Edge::new(
            to_node(i1 - 1, origin, line_no)?,
            to_node(j1 - 1, origin, line_no)?,
            w,
        ));
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(origin, 0, "missing size line"))?;
    if edges.len() != nnz {
        return Err(parse_err(
            origin,
            0,
            format!("declared {nnz} entries, found {}", edges.len()),
        ));
    }
    Graph::new(n, edges)
}

/// Writes `edges` in stored order and orientation.
pub fn write_edges<W: Write>(out: &mut W, n: usize, edges: &[Edge], format: Format) -> Result<()> {
    match format {
        Format::Tsv => {
            writeln!(out, "# nodes {n}")?;
            for e in edges {
                writeln!(out, "{}\t{}\t{}", e.u, e.v, e.w)?;
            }
        }
        Format::MatrixMarket => {
            writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(out, "{n} {n} {}", edges.len())?;
            for e in edges {
                writeln!(out, "{} {} {}", e.u + 1, e.v + 1, e.w)?;
            }
        }
    }
    Ok(())
}

pub fn write_graph<W: Write>(out: &mut W, graph: &Graph, format: Format) -> Result<()> {
    write_edges(out, graph.node_count(), graph.edges(), format)
}

pub fn save_graph(path: impl AsRef<Path>, graph: &Graph, format: Format) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_graph(&mut out, graph, format)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GenSpec};
    use proptest::prelude::*;

    pub(crate) const T_STAR_TSV: &str = "\
# canonical six-node fixture
0 1 1
0 2 1
1 3 1
1 4 1
2 5 1
3 5 1
4 5 1
3 4 1
";

    #[test]
    fn tsv_fixture() {
        let g = parse_graph(T_STAR_TSV, Format::Tsv, "t").unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(*g.edge(5), Edge::new(3, 5, 1.0));
    }

    #[test]
    fn tsv_single_edge_and_self_loop() {
        let g = parse_graph("0 1 1.0\n", Format::Tsv, "t").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert!(matches!(
            parse_graph("0 0 1.0\n", Format::Tsv, "t"),
            Err(Error::SelfLoop(0))
        ));
    }

    #[test]
    fn tsv_errors_carry_line_numbers() {
        let err = parse_graph("0 1 1\n1 x 2\n", Format::Tsv, "f.tsv").unwrap_err();
        assert!(err.to_string().starts_with("f.tsv:2:"), "{err}");
        assert!(parse_graph("0 1\n", Format::Tsv, "t").is_err());
        assert!(parse_graph("0 1 1 4\n", Format::Tsv, "t").is_err());
        assert!(matches!(
            parse_graph("0 1 nan\n", Format::Tsv, "t"),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            parse_graph("0 1 1\n1 0 1\n", Format::Tsv, "t"),
            Err(Error::DuplicateEdge(1, 0))
        ));
    }

    #[test]
    fn tsv_declared_node_count() {
        let g = parse_graph("# nodes 5\n0 1 1\n", Format::Tsv, "t").unwrap();
        assert_eq!(g.node_count(), 5);
        assert!(parse_graph("# nodes 1\n0 1 1\n", Format::Tsv, "t").is_err());
    }

    #[test]
    fn matrix_market_is_one_based() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n3 3 2\n2 1 0.5\n3 2 2\n";
        let g = parse_graph(text, Format::MatrixMarket, "m").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges(), &[Edge::new(1, 0, 0.5), Edge::new(2, 1, 2.0)]);

        let pattern = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n";
        let g = parse_graph(pattern, Format::MatrixMarket, "m").unwrap();
        assert_eq!(g.edge(0).w, 1.0);
    }

    #[test]
    fn matrix_market_errors() {
        let bad = [
            "%%MatrixMarket matrix array real general\n2 2\n",
            "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 2 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 3 1\n",
            "0 1 1\n",
        ];
        for text in bad {
            assert!(
                parse_graph(text, Format::MatrixMarket, "m").is_err(),
                "{text}"
            );
        }
    }

    #[test]
    fn detects_format() {
        assert_eq!(Format::from_path("a/b.mtx"), Format::MatrixMarket);
        assert_eq!(Format::from_path("a/b.tsv"), Format::Tsv);
        assert_eq!(
            Format::detect("%%MatrixMarket matrix coordinate real general"),
            Format::MatrixMarket
        );
        assert_eq!(Format::detect("0 1 1"), Format::Tsv);
    }

    #[test]
    fn load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tsv");
        std::fs::write(&path, T_STAR_TSV).unwrap();
        let g = load_graph(&path, Format::Tsv).unwrap();
        assert_eq!(g.edge_count(), 8);
        assert!(load_graph(dir.path().join("missing.tsv"), Format::Tsv).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn round_trip_is_exact(n in 2usize..60, extra in 0usize..80, seed in any::<u64>(), mm in any::<bool>()) {
            let max = n * (n - 1) / 2;
            let m = (n - 1 + extra).min(max);
            let g = generate_graph(&GenSpec::new(n, m, seed)).unwrap();
            let format = if mm { Format::MatrixMarket } else { Format::Tsv };
            let mut buf = Vec::new();
            write_graph(&mut buf, &g, format).unwrap();
            let back = parse_graph(std::str::from_utf8(&buf).unwrap(), format, "rt").unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
