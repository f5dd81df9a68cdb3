//! Entity grids: entities x sentences role matrices.

use crate::error::{Error, Result};

/// Syntactic role of an entity occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Subject,
    Object,
    Other,
    Absent,
}

impl Role {
    pub fn symbol(self) -> char {
        match self {
            Role::Subject => 'S',
            Role::Object => 'O',
            Role::Other => 'X',
            Role::Absent => '-',
        }
    }

    pub fn from_symbol(c: &str) -> Option<Role> {
        match c {
            "S" => Some(Role::Subject),
            "O" => Some(Role::Object),
            "X" => Some(Role::Other),
            "-" => Some(Role::Absent),
            _ => None,
        }
    }

    pub fn is_present(self) -> bool {
        self != Role::Absent
    }
}

/// Entities x sentences role matrix. Every entity occurs in at least one
/// sentence; a grid may have zero entities but always spans >= 1 sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityGrid {
    entities: Vec<String>,
    n_sentences: usize,
    roles: Vec<Vec<Role>>,
}

impl EntityGrid {
    pub fn new(entities: Vec<String>, n_sentences: usize, roles: Vec<Vec<Role>>) -> Result<Self> {
        if n_sentences == 0 {
            return Err(Error::InvalidArgument("grid must span at least one sentence".into()));
        }
        if entities.len() != roles.len() {
            return Err(Error::InvalidArgument(format!(
                "{} entity labels but {} role rows",
                entities.len(),
                roles.len()
            )));
        }
        for (label, row) in entities.iter().zip(&roles) {
            if row.len() != n_sentences {
                return Err(Error::InvalidArgument(format!(
                    "entity '{label}' has {} roles for {} sentences",
                    row.len(),
                    n_sentences
                )));
            }
            if !row.iter().any(|r| r.is_present()) {
                return Err(Error::InvalidArgument(format!(
                    "entity '{label}' never occurs in any sentence"
                )));
            }
        }
        Ok(EntityGrid {
            entities,
            n_sentences,
            roles,
        })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn n_sentences(&self) -> usize {
        self.n_sentences
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn role(&self, entity: usize, sentence: usize) -> Role {
        self.roles[entity][sentence]
    }

    pub fn rows(&self) -> &[Vec<Role>] {
        &self.roles
    }

    /// TSV: one line per entity, label then one role symbol per sentence.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (label, row) in self.entities.iter().zip(&self.roles) {
            out.push_str(label);
            for role in row {
                out.push('\t');
                out.push(role.symbol());
            }
            out.push('\n');
        }
        out
    }
}

/// Parses a TSV entity grid: first column the entity label, remaining
/// columns role symbols S, O, X or -.
pub fn parse_entity_grid(content: &str) -> Result<EntityGrid> {
    let mut entities = Vec::new();
    let mut roles: Vec<Vec<Role>> = Vec::new();
    let mut n_sentences = None;
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let label = cols.next().expect("split yields at least one field");
        let row: Vec<Role> = cols
            .map(|c| {
                Role::from_symbol(c.trim()).ok_or_else(|| {
                    Error::malformed("entity grid", lineno, format!("unknown role symbol '{c}'"))
                })
            })
            .collect::<Result<_>>()?;
        if row.is_empty() {
            return Err(Error::malformed("entity grid", lineno, "row has no role columns"));
        }
        match n_sentences {
            None => n_sentences = Some(row.len()),
            Some(n) if n != row.len() => {
                return Err(Error::malformed(
                    "entity grid",
                    lineno,
                    format!("ragged row: {} roles, expected {n}", row.len()),
                ))
            }
            _ => {}
        }
        entities.push(label.trim().to_owned());
        roles.push(row);
    }
    let n_sentences = n_sentences
        .ok_or_else(|| Error::InvalidArgument("entity grid file has no rows".into()))?;
    EntityGrid::new(entities, n_sentences, roles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_row() {
        let g = parse_entity_grid("A\tS\tO\t-\n").unwrap();
        assert_eq!(g.n_entities(), 1);
        assert_eq!(g.n_sentences(), 3);
        assert_eq!(
            g.rows()[0],
            vec![Role::Subject, Role::Object, Role::Absent]
        );
    }

    #[test]
    fn rejects_all_absent_row() {
        let err = parse_entity_grid("A\t-\t-\n").unwrap_err();
        assert!(err.to_string().contains("never occurs"));
    }

    #[test]
    fn rejects_unknown_symbol_and_ragged_rows() {
        assert!(parse_entity_grid("A\tS\tQ\n").is_err());
        let err = parse_entity_grid("A\tS\tO\nB\tX\n").unwrap_err();
        assert!(err.to_string().contains("ragged"));
    }

    #[test]
    fn round_trips() {
        let text = "john\tS\t-\tX\nnew york\tO\tX\t-\n";
        let g = parse_entity_grid(text).unwrap();
        assert_eq!(g.to_tsv(), text);
        assert_eq!(parse_entity_grid(&g.to_tsv()).unwrap(), g);
    }
}
