use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::Instance;

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// A table of feature columns with a binary label per row.
#[derive(Clone, Debug)]
pub struct Dataset {
    columns: Vec<Column>,
    labels: Vec<bool>,
    positive_class: String,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "?" | "NA" | "NaN" | "nan" | "null")
}

impl Dataset {
    /// Reads a headed CSV. A column is numeric when its first value parses
    /// as a number, categorical otherwise. Labels are reduced one-vs-all:
    /// rows of `target_class` are positive. Without a target the label
    /// column must have at most two classes and the larger one (in string
    /// order) is positive.
    pub fn from_reader<R: Read>(
        reader: R,
        label_column: &str,
        target_class: Option<&str>,
    ) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
        let label_at = header
            .iter()
            .position(|h| h == label_column)
            .ok_or_else(|| Error::Dataset(format!("no label column named {label_column:?}")))?;

        let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        for (i, record) in csv.records().enumerate() {
            let record = record?;
            let row = i + 1;
            if record.len() != header.len() {
                return Err(Error::DatasetCell {
                    row,
                    column: header.get(record.len()).cloned().unwrap_or_default(),
                    message: format!("expected {} cells, found {}", header.len(), record.len()),
                });
            }
            for (j, cell) in record.iter().enumerate() {
                if is_missing(cell) {
                    return Err(Error::DatasetCell {
                        row,
                        column: header[j].clone(),
                        message: "missing value".into(),
                    });
                }
                raw[j].push(cell.to_string());
            }
        }
        if raw[label_at].is_empty() {
            return Err(Error::Dataset("no data rows".into()));
        }

        let label_cells = raw.remove(label_at);
        let classes: BTreeSet<&str> = label_cells.iter().map(String::as_str).collect();
        let positive_class = match target_class {
            Some(t) if classes.contains(t) => t.to_string(),
            Some(t) => {
                return Err(Error::Dataset(format!(
                    "target class {t:?} does not occur in column {label_column:?}"
                )))
            }
            None if classes.len() <= 2 => classes.last().expect("nonempty").to_string(),
            None => {
                return Err(Error::Dataset(format!(
                    "column {label_column:?} has {} classes; pick one with a target class",
                    classes.len()
                )))
            }
        };
        let labels = label_cells.iter().map(|c| *c == positive_class).collect();

        let names = header
            .into_iter()
            .enumerate()
            .filter(|&(j, _)| j != label_at);
        let columns = names
            .zip(raw)
            .map(|((_, name), cells)| {
                let data = if cells[0].parse::<f64>().is_ok() {
                    let values = cells
                        .iter()
                        .enumerate()
                        .map(|(i, c)| {
                            c.parse::<f64>()
                                .ok()
                                .filter(|v| v.is_finite())
                                .ok_or_else(|| Error::DatasetCell {
                                    row: i + 1,
                                    column: name.clone(),
                                    message: format!("{c:?} is not a number"),
                                })
                        })
                        .collect::<Result<_>>()?;
                    ColumnData::Numeric(values)
                } else {
                    ColumnData::Categorical(cells)
                };
                Ok(Column { name, data })
            })
            .collect::<Result<_>>()?;
        Ok(Dataset {
            columns,
            labels,
            positive_class,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positive_class(&self) -> &str {
        &self.positive_class
    }
}

/// Reads a CSV file; see [`Dataset::from_reader`].
pub fn ingest_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    target_class: Option<&str>,
) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    Dataset::from_reader(std::io::BufReader::new(file), label_column, target_class)
}

/// Midpoints between consecutive distinct values.
pub fn candidate_thresholds(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted
        .windows(2)
        .map(|w| w[0] + (w[1] - w[0]) / 2.0)
        .collect()
}

/// A Boolean feature derived from one source column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Predicate {
    /// `value > threshold`
    Threshold {
        column: usize,
        name: String,
        threshold: f64,
    },
    /// `value == category`
    Equals {
        column: usize,
        name: String,
        category: String,
    },
}

impl Predicate {
    pub fn column(&self) -> usize {
        match self {
            Predicate::Threshold { column, .. } | Predicate::Equals { column, .. } => *column,
        }
    }

    pub fn eval(&self, data: &Dataset, row: usize) -> bool {
        match (self, &data.columns[self.column()].data) {
            (Predicate::Threshold { threshold, .. }, ColumnData::Numeric(v)) => v[row] > *threshold,
            (Predicate::Equals { category, .. }, ColumnData::Categorical(v)) => v[row] == *category,
            _ => panic!("predicate does not match the column type"),
        }
    }
}

/// Boolean features in variable order: variable `i` is `features[i]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub features: Vec<Predicate>,
}

impl FeatureMap {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Variable index of `p`, registering it if new.
    pub fn intern(&mut self, p: Predicate) -> usize {
        if let Some(i) = self.features.iter().position(|q| *q == p) {
            return i;
        }
        self.features.push(p);
        self.features.len() - 1
    }

    pub fn binarize_row(&self, data: &Dataset, row: usize) -> Instance {
        Instance::new(self.features.iter().map(|p| p.eval(data, row)).collect())
    }

    pub fn materialize(&self, data: &Dataset) -> BinarizedDataset {
        BinarizedDataset {
            rows: (0..data.len())
                .map(|r| self.binarize_row(data, r))
                .collect(),
            labels: data.labels().to_vec(),
            feature_map: self.clone(),
        }
    }
}

/// Rows as Boolean instances over the features of a [`FeatureMap`].
#[derive(Clone, Debug)]
pub struct BinarizedDataset {
    pub rows: Vec<Instance>,
    pub labels: Vec<bool>,
    pub feature_map: FeatureMap,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, target: Option<&str>) -> Result<Dataset> {
        Dataset::from_reader(text.as_bytes(), "class", target)
    }

    #[test]
    fn midpoint_rule() {
        assert_eq!(candidate_thresholds(&[1.0, 3.0]), vec![2.0]);
        assert_eq!(candidate_thresholds(&[3.0, 1.0, 3.0, 2.0]), vec![1.5, 2.5]);
        assert!(candidate_thresholds(&[4.0, 4.0]).is_empty());
    }

    #[test]
    fn two_row_numeric_file() {
        let d = read("a,class\n1.0,yes\n3.0,no\n", None).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.positive_class(), "yes");
        assert_eq!(d.labels(), &[true, false]);
        let ColumnData::Numeric(v) = &d.columns()[0].data else {
            panic!("expected numeric");
        };
        assert_eq!(candidate_thresholds(v), vec![2.0]);
    }

    #[test]
    fn one_versus_all() {
        let text = "colour,class\nred,a\nblue,b\ngreen,c\nred,b\n";
        let d = read(text, Some("b")).unwrap();
        assert_eq!(d.labels(), &[false, true, false, true]);
        assert!(matches!(d.columns()[0].data, ColumnData::Categorical(_)));
        assert!(matches!(read(text, None), Err(Error::Dataset(_))));
        assert!(matches!(read(text, Some("z")), Err(Error::Dataset(_))));
    }

    #[test]
    fn diagnostics_name_row_and_column() {
        match read("a,b,class\n1,2,x\n3,oops,y\n", None) {
            Err(Error::DatasetCell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
        match read("a,class\n1,x\n,y\n", None) {
            Err(Error::DatasetCell {
                row,
                column,
                message,
            }) => {
                assert_eq!((row, column.as_str()), (2, "a"));
                assert_eq!(message, "missing value");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Dataset::from_reader("a,b\n1,2\n".as_bytes(), "class", None),
            Err(Error::Dataset(_))
        ));
    }

    #[test]
    fn feature_map_round_trip() {
        let d = read("a,colour,class\n1,red,x\n5,blue,y\n3,red,y\n", None).unwrap();
        let mut map = FeatureMap::default();
        let t = map.intern(Predicate::Threshold {
            column: 0,
            name: "a".into(),
            threshold: 2.0,
        });
        let e = map.intern(Predicate::Equals {
            column: 1,
            name: "colour".into(),
            category: "red".into(),
        });
        assert_eq!((t, e), (0, 1));
        assert_eq!(map.intern(map.features[0].clone()), 0);
        let b = map.materialize(&d);
        let bits: Vec<String> = b.rows.iter().map(Instance::to_string).collect();
        assert_eq!(bits, vec!["01", "10", "11"]);
        for (r, row) in b.rows.iter().enumerate() {
            assert_eq!(*row, map.binarize_row(&d, r));
        }
    }
}
