use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Result, TaxonRecord, TaxonomyError, TaxonomyTable};

pub const BACKBONE_COLUMNS: [&str; 8] = [
    "taxon_id",
    "scientific_name",
    "common_name",
    "genus",
    "family",
    "order",
    "class",
    "synonyms",
];

/// Loads the backbone CSV (`taxon_id,scientific_name,common_name,genus,
/// family,order,class,synonyms`, synonyms `|`-separated).
pub fn load_backbone(path: impl AsRef<Path>) -> Result<TaxonomyTable> {
    let file = File::open(path.as_ref())?;
    read_backbone(file)
}

pub fn read_backbone<R: Read>(reader: R) -> Result<TaxonomyTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let header = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let found: Vec<&str> = header.iter().collect();
    if found != BACKBONE_COLUMNS {
        return Err(TaxonomyError::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                BACKBONE_COLUMNS.join(","),
                found.join(",")
            ),
        });
    }

    let mut records = Vec::new();
    let mut lines = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(e, line)
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("").trim().to_string();
        let common = field(2);
        records.push(TaxonRecord {
            taxon_id: field(0),
            scientific_name: field(1),
            common_name: (!common.is_empty()).then_some(common),
            genus: field(3),
            family: field(4),
            order: field(5),
            class_name: field(6),
            synonyms: field(7)
                .split('|')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
        });
        if records.last().is_some_and(|r| r.taxon_id.is_empty()) {
            return Err(TaxonomyError::Parse {
                line,
                message: "empty taxon_id".into(),
            });
        }
        lines.push(line);
    }
    TaxonomyTable::from_records(records, Some(&lines))
}

/// Writes records in the layout [`read_backbone`] accepts.
pub fn write_backbone<W: Write>(table: &TaxonomyTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| TaxonomyError::Io(e.into());
    w.write_record(BACKBONE_COLUMNS).map_err(io)?;
    for r in table.records() {
        let synonyms = r.synonyms.join("|");
        w.write_record([
            r.taxon_id.as_str(),
            &r.scientific_name,
            r.common_name.as_deref().unwrap_or(""),
            &r.genus,
            &r.family,
            &r.order,
            &r.class_name,
            &synonyms,
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error, line: u64) -> TaxonomyError {
    TaxonomyError::Parse {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{LookupKind, Rank};

    const HEADER: &str = "taxon_id,scientific_name,common_name,genus,family,order,class,synonyms\n";

    fn load(body: &str) -> Result<TaxonomyTable> {
        read_backbone(format!("{HEADER}{body}").as_bytes())
    }

    #[test]
    fn three_rows() {
        let t = load(
            "1,Parus major,Great Tit,Parus,Paridae,Passeriformes,Aves,Parus major major|P. major\n\
             2,Turdus merula,Common Blackbird,Turdus,Turdidae,Passeriformes,Aves,\n\
             3,Strix aluco,,Strix,Strigidae,Strigiformes,Aves,\n",
        )
        .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.by_id("3").unwrap().common_name, None);
        assert_eq!(t.records()[0].synonyms.len(), 2);
        assert_eq!(t.members(Rank::Order, "Passeriformes"), &[0, 1]);
        assert_eq!(t.resolve("Common Blackbird", LookupKind::Common).unwrap().taxon_id, "2");
        assert_eq!(t.resolve("p. major", LookupKind::Scientific).unwrap().taxon_id, "1");
    }

    #[test]
    fn write_round_trips() {
        let t = crate::synth::taxonomy(40, 2);
        let mut buf = Vec::new();
        write_backbone(&t, &mut buf).unwrap();
        assert_eq!(read_backbone(buf.as_slice()).unwrap().records(), t.records());
    }

    #[test]
    fn duplicate_scientific_name() {
        let err = load(
            "1,Parus major,Great Tit,Parus,Paridae,Passeriformes,Aves,\n\
             2,parus  major,,Parus,Paridae,Passeriformes,Aves,\n",
        )
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::DuplicateName { line: 3, .. }), "{err}");
    }

    #[test]
    fn inconsistent_genus_family() {
        // oracle: group rows by genus, collect distinct families
        let body = "1,Parus major,,Parus,Paridae,Passeriformes,Aves,\n\
                    2,Parus minor,,Parus,Corvidae,Passeriformes,Aves,\n";
        let mut by_genus: std::collections::BTreeMap<&str, std::collections::BTreeSet<&str>> =
            Default::default();
        for l in body.lines() {
            let f: Vec<&str> = l.split(',').collect();
            by_genus.entry(f[3]).or_default().insert(f[4]);
        }
        assert!(by_genus.values().any(|fams| fams.len() > 1));

        let err = load(body).unwrap_err();
        assert!(
            matches!(err, TaxonomyError::InconsistentLineage { line: 3, rank: Rank::Genus, .. }),
            "{err}"
        );
    }

    #[test]
    fn inconsistent_family_order() {
        let err = load(
            "1,Parus major,,Parus,Paridae,Passeriformes,Aves,\n\
             2,Cyanistes caeruleus,,Cyanistes,Paridae,Strigiformes,Aves,\n",
        )
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::InconsistentLineage { rank: Rank::Family, .. }));
    }

    #[test]
    fn missing_lineage() {
        let err = load("1,Parus major,,Parus,,Passeriformes,Aves,\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::MissingLineage { line: 2, rank: Rank::Family, .. }));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = load(
            "1,Parus major,,Parus,Paridae,Passeriformes,Aves,\n\
             2,Turdus merula,,Turdus\n",
        )
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn wrong_header() {
        let err = read_backbone("id,name\n1,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TaxonomyError::Parse { line: 1, .. }));
    }
}
