//! Loading graph-collection datasets and persisting embedding matrices.
//!
//! A dataset directory holds
//!
//! * `graphs.json`: `{"<graph id>": [[u, v], ...], ...}` with node ids `0..N`,
//!   `N` being one more than the largest id that appears;
//! * `target.csv` (optional): header `id,target`, binary labels;
//! * `features.json` (optional): `{"<graph id>": [[x_0, ..., x_{m-1}], ...]}` indexed by node.
//!
//! Graphs without explicit features get [`Graph::structural_features`].

use std::borrow::Cow;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde_json::Value;

use crate::embedding::{embed_graph, embed_indexed, EmbeddingParams, ErrorPolicy};
use crate::error::{Error, Result};
use crate::graph::{AttributeMatrix, Graph};

pub const GRAPHS_FILE: &str = "graphs.json";
pub const TARGET_FILE: &str = "target.csv";
pub const FEATURES_FILE: &str = "features.json";

/// Binary labels keyed by graph id, in file order.
pub type Labels = IndexMap<String, u8>;

#[derive(Debug, Clone, Default)]
pub struct GraphCollection {
    pub graphs: Vec<(String, Graph)>,
    pub labels: Option<Labels>,
    /// Explicit node features keyed by graph id; present for all graphs or none.
    pub attributes: Option<IndexMap<String, AttributeMatrix>>,
}

impl GraphCollection {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.graphs.iter().map(|(id, _)| id.as_str())
    }

    /// Features of graph `index`: the explicit ones if loaded, structural otherwise.
    pub fn attributes_for(&self, index: usize) -> Cow<'_, AttributeMatrix> {
        let (id, graph) = &self.graphs[index];
        match self.attributes.as_ref().and_then(|a| a.get(id)) {
            Some(a) => Cow::Borrowed(a),
            None => Cow::Owned(graph.structural_features()),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| Error::io(path, e))?;
    Ok(s)
}

fn parse_json_object(path: &Path) -> Result<serde_json::Map<String, Value>> {
    let text = read_to_string(path)?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::input(format!("{}: top level must be a JSON object", path.display()))),
        Err(e) => Err(Error::input(format!("{}: {e}", path.display()))),
    }
}

fn parse_edges(path: &Path, id: &str, value: &Value) -> Result<Graph> {
    let bad = |what: &str| Error::input(format!("{}: graph \"{id}\": {what}", path.display()));
    let entries = value.as_array().ok_or_else(|| bad("expected an array of edges"))?;
    let mut edges = Vec::with_capacity(entries.len());
    for entry in entries {
        let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("edge must be a [u, v] pair"))?;
        let node = |v: &Value| {
            v.as_u64()
                .and_then(|x| usize::try_from(x).ok())
                .ok_or_else(|| bad(&format!("node id {v} is not a non-negative integer")))
        };
        edges.push((node(&pair[0])?, node(&pair[1])?));
    }
    let num_nodes = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let (graph, dropped) = Graph::from_edge_list(&edges, num_nodes)?;
    if dropped.total() > 0 {
        log::debug!(
            "graph \"{id}\": dropped {} self-loops and {} duplicate edges",
            dropped.self_loops,
            dropped.duplicates
        );
    }
    Ok(graph)
}

fn parse_features(path: &Path, id: &str, value: &Value) -> Result<AttributeMatrix> {
    let bad = |what: String| Error::input(format!("{}: graph \"{id}\": {what}", path.display()));
    let rows = value
        .as_array()
        .ok_or_else(|| bad("expected an array of feature rows".into()))?
        .iter()
        .enumerate()
        .map(|(node, row)| {
            row.as_array()
                .ok_or_else(|| bad(format!("features of node {node} must be an array")))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| bad(format!("non-numeric feature {x} at node {node}"))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    AttributeMatrix::from_rows(&rows).map_err(|e| e.context(format!("{}: graph \"{id}\"", path.display())))
}

/// Reads a `target.csv` with header `id,target` and labels in {0, 1}.
pub fn read_labels(path: &Path) -> Result<Labels> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::input(format!("{}: missing column \"{name}\"", path.display())))
    };
    let (id_col, target_col) = (column("id")?, column("target")?);

    let mut labels = Labels::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::input(format!("{}: line {line}: {e}", path.display())))?;
        let id = record.get(id_col).unwrap_or_default().trim().to_string();
        let raw = record.get(target_col).unwrap_or_default().trim();
        let label = match raw {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::input(format!(
                    "{}: line {line}: target \"{other}\" is not 0 or 1",
                    path.display()
                )))
            }
        };
        if labels.insert(id.clone(), label).is_some() {
            return Err(Error::input(format!("{}: line {line}: duplicate id \"{id}\"", path.display())));
        }
    }
    Ok(labels)
}

/// Loads `graphs.json` and, when present, `target.csv` and `features.json` from `dir`.
pub fn load_dataset(dir: &Path) -> Result<GraphCollection> {
    let graphs_path = dir.join(GRAPHS_FILE);
    if !graphs_path.is_file() {
        return Err(Error::input(format!("{} not found", graphs_path.display())));
    }
    let graphs = parse_json_object(&graphs_path)?
        .iter()
        .map(|(id, edges)| Ok((id.clone(), parse_edges(&graphs_path, id, edges)?)))
        .collect::<Result<Vec<_>>>()?;

    let target_path = dir.join(TARGET_FILE);
    let labels = if target_path.is_file() {
        let labels = read_labels(&target_path)?;
        let known: std::collections::HashSet<&str> = graphs.iter().map(|(id, _)| id.as_str()).collect();
        if let Some(id) = labels.keys().find(|id| !known.contains(id.as_str())) {
            return Err(Error::input(format!(
                "{}: label for unknown graph \"{id}\"",
                target_path.display()
            )));
        }
        Some(labels)
    } else {
        None
    };

    let features_path = dir.join(FEATURES_FILE);
    let attributes = if features_path.is_file() {
        let raw = parse_json_object(&features_path)?;
        let mut attributes = IndexMap::with_capacity(graphs.len());
        let mut width = None;
        for (id, graph) in &graphs {
            let value = raw.get(id).ok_or_else(|| {
                Error::input(format!("{}: no features for graph \"{id}\"", features_path.display()))
            })?;
            let attrs = parse_features(&features_path, id, value)?;
            if attrs.num_rows() != graph.num_nodes() {
                return Err(Error::input(format!(
                    "{}: graph \"{id}\" has {} nodes but {} feature rows",
                    features_path.display(),
                    graph.num_nodes(),
                    attrs.num_rows()
                )));
            }
            if *width.get_or_insert(attrs.num_features()) != attrs.num_features() {
                return Err(Error::input(format!(
                    "{}: graph \"{id}\" has {} features, others have {}",
                    features_path.display(),
                    attrs.num_features(),
                    width.unwrap()
                )));
            }
            attributes.insert(id.clone(), attrs);
        }
        Some(attributes)
    } else {
        None
    };

    Ok(GraphCollection {
        graphs,
        labels,
        attributes,
    })
}

/// Ids and embedding rows, in matching order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Embeds every graph of the collection on the current rayon pool.
pub fn embed_dataset(
    collection: &GraphCollection,
    params: &EmbeddingParams,
    policy: ErrorPolicy,
) -> Result<EmbeddingTable> {
    if collection.is_empty() {
        return Err(Error::input("dataset contains no graphs"));
    }
    params.validate()?;
    let outcome = embed_indexed(collection.len(), policy, |i| {
        embed_graph(&collection.graphs[i].1, &collection.attributes_for(i), params)
            .map_err(|e| e.context(format!("graph \"{}\"", collection.graphs[i].0)))
    })?;
    let mut table = EmbeddingTable::default();
    for (index, row) in outcome.rows {
        table.ids.push(collection.graphs[index].0.clone());
        table.rows.push(row.into_inner());
    }
    if table.rows.is_empty() {
        return Err(Error::input("every graph failed to embed"));
    }
    Ok(table)
}

/// CSV with header `id,x0,x1,…`. Floats use the shortest representation that
/// parses back to the identical `f64` (at most 17 significant digits).
pub fn write_embeddings_to<W: Write>(out: W, ids: &[String], rows: &[Vec<f64>]) -> std::io::Result<()> {
    if ids.len() != rows.len() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("{} ids for {} rows", ids.len(), rows.len()),
        ));
    }
    let dim = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != dim) {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "ragged embedding rows"));
    }
    let mut out = BufWriter::new(out);
    write!(out, "id")?;
    for c in 0..dim {
        write!(out, ",x{c}")?;
    }
    writeln!(out)?;
    for (id, row) in ids.iter().zip(rows) {
        write!(out, "{id}")?;
        for x in row {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn write_embeddings(path: &Path, ids: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_embeddings_to(file, ids, rows).map_err(|e| Error::io(path, e))
}

/// Inverse of [`write_embeddings`].
pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let text = read_to_string(path)?;
    parse_embeddings(&text).map_err(|e| e.context(path.display()))
}

pub fn parse_embeddings(text: &str) -> Result<EmbeddingTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::input("empty embedding file"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"id") {
        return Err(Error::input("line 1: header must start with \"id\""));
    }
    for (c, name) in columns[1..].iter().enumerate() {
        if *name != format!("x{c}") {
            return Err(Error::input(format!("line 1: column {} should be \"x{c}\", found \"{name}\"", c + 1)));
        }
    }
    let dim = columns.len() - 1;

    let mut table = EmbeddingTable::default();
    for (index, line) in lines {
        let line_no = index + 1;
        let mut cells = line.split(',');
        let id = cells.next().unwrap_or_default();
        let row = cells
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::input(format!("line {line_no}: \"{cell}\" is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != dim {
            return Err(Error::input(format!(
                "line {line_no}: {} values but the header declares {dim}",
                row.len()
            )));
        }
        table.ids.push(id.to_string());
        table.rows.push(row);
    }
    if table.rows.is_empty() {
        return Err(Error::input("embedding file has no data rows"));
    }
    Ok(table)
}
