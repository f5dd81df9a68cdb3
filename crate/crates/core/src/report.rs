//! Small table model rendered as markdown or CSV.
//!
//! Reports embed header comment lines (toolkit version, resolved
//! configuration) so output files are self-describing; rendering is a pure
//! function of the table, so identical inputs give identical bytes.

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    /// Fixed-precision number.
    Num(f64, usize),
    /// Undefined value: "-" in markdown, empty in CSV.
    Undefined,
    Empty,
}

impl Cell {
    pub fn num2(v: f64) -> Cell {
        Cell::Num(v, 2)
    }

    fn markdown(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(v, p) => format!("{v:.p$}", p = p),
            Cell::Undefined => "-".to_owned(),
            Cell::Empty => String::new(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => csv_escape(s),
            Cell::Num(v, p) => format!("{v:.p$}", p = p),
            Cell::Undefined | Cell::Empty => String::new(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::Text(s)
    }
}

/// A rectangular table with a header row and optional comment header lines.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Table {
        Table {
            comments: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("<!-- ");
            out.push_str(c);
            out.push_str(" -->\n");
        }
        out.push_str("| ");
        out.push_str(&self.header.join(" | "));
        out.push_str(" |\n|");
        for _ in &self.header {
            out.push_str("---|");
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str("| ");
            out.push_str(&row.iter().map(Cell::markdown).collect::<Vec<_>>().join(" | "));
            out.push_str(" |\n");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(
            &self
                .header
                .iter()
                .map(|h| csv_escape(h))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}
