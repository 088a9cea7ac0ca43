use std::path::Path;

use crate::error::CliResult;

/// Pre-formatted CSV table: a header row plus string records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn write<W: std::io::Write>(&self, w: W) -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> CliResult<()> {
        self.write(std::fs::File::create(path)?)
    }

    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_with_commas_are_quoted() {
        let t = Table { header: vec!["id".into(), "x".into()], rows: vec![vec!["a,b".into(), "1.5e0".into()]] };
        assert_eq!(t.to_csv_string().unwrap(), "id,x\n\"a,b\",1.5e0\n");
        assert_eq!(t.column("x"), Some(1));
    }
}
