use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{Entry, IdMap, Interactions, RatingMatrix, RatingScale};
use crate::error::{Error, Result};

/// How a delimited rating file is laid out.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Declared scale; inferred from the distinct values when absent.
    pub scale: Option<RatingScale>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b'\t',
            has_header: false,
            scale: None,
        }
    }
}

/// Loads `<user> <delim> <item> <delim> <rating>` lines. Extra trailing
/// columns (timestamps) are ignored.
pub fn load_ratings(path: impl AsRef<Path>, options: &LoadOptions) -> Result<RatingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ratings(file, options)
}

pub fn read_ratings(reader: impl Read, options: &LoadOptions) -> Result<RatingMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut users: HashMap<String, u32> = HashMap::new();
    let mut items: HashMap<String, u32> = HashMap::new();
    let mut user_names = Vec::new();
    let mut item_names = Vec::new();
    // (user, item) -> (index into entries, line)
    let mut seen: HashMap<(u32, u32), (usize, u64)> = HashMap::new();
    let mut entries = Vec::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected user, item and rating, found {} field(s)", fields.len()),
            });
        }
        let value: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("rating {:?} is not a number", fields[2]),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("rating {:?} is not finite", fields[2]),
            });
        }
        let user = intern(&mut users, &mut user_names, fields[0]);
        let item = intern(&mut items, &mut item_names, fields[1]);

        match seen.get(&(user, item)) {
            Some(&(idx, first_line)) => {
                let previous: &Entry = &entries[idx];
                if previous.value != value {
                    return Err(Error::DuplicateRating {
                        user: fields[0].to_string(),
                        item: fields[1].to_string(),
                        first_line,
                        second_line: line,
                    });
                }
            }
            None => {
                seen.insert((user, item), (entries.len(), line));
                entries.push(Entry { user, item, value });
            }
        }
    }

    if entries.is_empty() {
        return Err(Error::Empty("no ratings in input".into()));
    }

    let scale = match &options.scale {
        Some(s) => s.clone(),
        None => RatingScale::infer(entries.iter().map(|e| e.value))?,
    };
    let data = Interactions::new(IdMap::new(user_names), IdMap::new(item_names), entries)?;
    RatingMatrix::new(data, scale)
}

fn intern(table: &mut HashMap<String, u32>, names: &mut Vec<String>, key: &str) -> u32 {
    if let Some(&id) = table.get(key) {
        return id;
    }
    let id = names.len() as u32;
    names.push(key.to_string());
    table.insert(key.to_string(), id);
    id
}

/// Writes entries with their external ids in the loader's format.
pub fn write_interactions(
    matrix: &Interactions,
    path: impl AsRef<Path>,
    delimiter: u8,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let d = delimiter as char;
    for e in matrix.entries() {
        writeln!(
            out,
            "{}{d}{}{d}{}",
            matrix.user_ids().external(e.user),
            matrix.item_ids().external(e.item),
            e.value
        )
        .map_err(|err| Error::io(path, err))?;
    }
    out.flush().map_err(|err| Error::io(path, err))
}

/// Two-column `<external_id> <internal_id>` table.
pub fn write_remap(ids: &IdMap, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let d = delimiter as char;
    for (internal, external) in ids.iter() {
        writeln!(out, "{external}{d}{internal}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spaces() -> LoadOptions {
        LoadOptions {
            delimiter: b' ',
            ..LoadOptions::default()
        }
    }

    #[test]
    fn three_line_file() {
        let m = read_ratings("u1 i1 5\nu1 i2 3\nu2 i1 4\n".as_bytes(), &spaces()).unwrap();
        assert_eq!(m.n_users(), 2);
        assert_eq!(m.n_items(), 2);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.user_ids().external(1), "u2");
        assert_eq!(m.get(0, 1), Some(3.0));
    }

    #[test]
    fn inferred_scale_is_sorted_distinct_values() {
        let text = "a\tx\t5\nb\tx\t1\nc\ty\t3\nd\ty\t2\ne\tz\t4\n";
        let m = read_ratings(text.as_bytes(), &LoadOptions::default()).unwrap();
        assert_eq!(m.scale().levels(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn header_and_blank_lines_and_timestamps() {
        let text = "user,item,rating,ts\nu1,i1,4,99\n\nu2,i1,2,100\n";
        let opts = LoadOptions {
            delimiter: b',',
            has_header: true,
            scale: Some(RatingScale::integer(1, 5).unwrap()),
        };
        let m = read_ratings(text.as_bytes(), &opts).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.scale().levels().len(), 5);
    }

    #[test]
    fn conflicting_duplicate_reports_both_lines() {
        let err = read_ratings("u1 i1 5\nu2 i1 3\nu1 i1 2\n".as_bytes(), &spaces()).unwrap_err();
        match err {
            Error::DuplicateRating {
                first_line,
                second_line,
                ..
            } => assert_eq!((first_line, second_line), (1, 3)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn identical_duplicate_is_collapsed() {
        let m = read_ratings("u1 i1 5\nu2 i1 3\nu1 i1 5\n".as_bytes(), &spaces()).unwrap();
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = read_ratings("u1 i1 5\nu2 i1 x\n".as_bytes(), &spaces()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = read_ratings("u1 i1 5\nu2\n".as_bytes(), &spaces()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            read_ratings("".as_bytes(), &spaces()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn off_scale_value_rejected_with_declared_scale() {
        let opts = LoadOptions {
            delimiter: b' ',
            has_header: false,
            scale: Some(RatingScale::integer(1, 5).unwrap()),
        };
        assert!(read_ratings("u1 i1 7\n".as_bytes(), &opts).is_err());
    }

    #[test]
    fn written_file_loads_back() {
        let m = read_ratings("u1 i1 5\nu1 i2 3\nu2 i1 4\n".as_bytes(), &spaces()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.tsv");
        write_interactions(&m, &path, b'\t').unwrap();
        let back = load_ratings(&path, &LoadOptions::default()).unwrap();
        assert_eq!(back, m);
        let remap = dir.path().join("users.map");
        write_remap(m.user_ids(), &remap, b'\t').unwrap();
        assert_eq!(std::fs::read_to_string(remap).unwrap(), "u1\t0\nu2\t1\n");
    }
}
