use std::io::{self, Write};
use std::sync::Arc;

use super::TimeGrid;

/// Recorded values of every model variable at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    names: Arc<[String]>,
    /// Variable-major: `data[var * grid.len() + k]`.
    data: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn from_parts(grid: TimeGrid, names: Arc<[String]>, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), names.len() * grid.len());
        Self { grid, names, data }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn series_at(&self, index: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[index * n..(index + 1) * n]
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.index_of(name).map(|i| self.series_at(i))
    }

    /// Value of `name` at grid time `t`.
    pub fn value(&self, name: &str, t: f64) -> Option<f64> {
        let k = self.grid.index_of(t)?;
        self.series(name).map(|s| s[k])
    }

    /// CSV with header `year,<var1>,<var2>,...` and one row per grid point.
    /// Values use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, out: W, columns: Option<&[String]>) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        let indices: Vec<usize> = match columns {
            Some(cols) => cols.iter().filter_map(|c| self.index_of(c)).collect(),
            None => (0..self.names.len()).collect(),
        };
        write!(out, "year")?;
        for &i in &indices {
            write!(out, ",{}", self.names[i])?;
        }
        writeln!(out)?;
        for (k, t) in self.grid.times().enumerate() {
            write!(out, "{t}")?;
            for &i in &indices {
                write!(out, ",{}", self.series_at(i)[k])?;
            }
            writeln!(out)?;
        }
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use crate::engine::{compile_model, ModelDefinition, TimeGrid};

    #[test]
    fn csv_layout_and_precision() {
        let mut def = ModelDefinition::default();
        def.stock("S", 1.0).flow("f", None, Some("S"), "S / 3");
        let traj = compile_model(&def)
            .unwrap()
            .run(&TimeGrid::new(2015.0, 2017.0, 1.0).unwrap())
            .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "year,S,f");
        assert_eq!(lines.len(), 4);
        let row: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(row[0], "2016");
        let s: f64 = row[1].parse().unwrap();
        assert_eq!(s, traj.series("S").unwrap()[1]);
        assert_eq!(traj.value("S", 2016.0), Some(s));
    }
}
