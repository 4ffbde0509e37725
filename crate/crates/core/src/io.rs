//! JSONL item files and assignment CSVs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::item::StreamItem;
use crate::model::AssignmentRecord;

/// Reads one [`StreamItem`] per non-blank line. Errors carry the 1-based line number.
pub fn read_items<R: Read>(reader: R) -> Result<Vec<StreamItem>> {
    let mut items = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: StreamItem = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

pub fn read_items_file(path: &Path) -> Result<Vec<StreamItem>> {
    read_items(File::open(path)?)
}

pub fn write_items<W: Write>(items: &[StreamItem], writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with header `item_id,arrival_index,cluster_id`.
pub fn write_assignments<W: Write>(records: &[AssignmentRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    if records.is_empty() {
        w.write_record(["item_id", "arrival_index", "cluster_id"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_assignments<R: Read>(reader: R) -> Result<Vec<AssignmentRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize()
        .enumerate()
        .map(|(i, rec)| {
            rec.map_err(|e| Error::Parse {
                // header is line 1
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_line_is_reported() {
        let text = "{\"id\":\"a\",\"arrival_index\":0,\"label\":null,\"values\":[[1.0]]}\n\n{oops}\n";
        match read_items(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_values_rejected_with_line() {
        let text = "{\"id\":\"a\",\"arrival_index\":0,\"label\":null,\"values\":[[1.0],[1.0,2.0]]}\n";
        assert!(matches!(read_items(text.as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn assignments_csv() {
        let recs = vec![
            AssignmentRecord { item_id: "x,1".into(), arrival_index: 3, cluster_id: 2 },
            AssignmentRecord { item_id: "y".into(), arrival_index: 4, cluster_id: 0 },
        ];
        let mut buf = Vec::new();
        write_assignments(&recs, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("item_id,arrival_index,cluster_id\n"));
        assert_eq!(read_assignments(buf.as_slice()).unwrap(), recs);
    }
}
