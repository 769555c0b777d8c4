/*!
Dataset model and ingestion.

A [`Dataset`] is a flat table of instances over a fixed feature schema with
one nominal class attribute. Two file dialects load into it:

* headered CSV, where the header declares each column as `name:num` or
  `name:cat` and the last column is the class (`class:cat` by convention);
* a minimal ARFF subset (`@relation`, `@attribute ... numeric` or
  `@attribute ... {a,b,c}`, `@data`), keywords case-insensitive.

`?` marks a missing value in both dialects. Categorical values and class
labels are interned to indices; for CSV the category set of a column is the
distinct values in file-order of first appearance, for ARFF it is the
declared domain. Instance weights are never stored here; they travel
beside a dataset as a plain `&[f64]` so the same data can carry different
weightings without copies.
*/

mod load;
mod ops;
pub mod synth;

pub use load::{load_dataset, save_arff, save_csv};
pub use ops::{inject_label_noise, shuffle, stratified_folds, stratified_split, NoiseSpec};

use crate::{Error, Result};

/// Index into `Dataset::classes`.
pub type ClassId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    /// Index into the owning feature's category list.
    Cat(usize),
    Missing,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeatureKind {
    Numeric,
    Categorical { categories: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureDescriptor {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureDescriptor {
    pub fn numeric(name: &str) -> Self {
        FeatureDescriptor {
            name: name.to_string(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        FeatureDescriptor {
            name: name.to_string(),
            kind: FeatureKind::Categorical {
                categories: categories.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric)
    }

    /// Number of declared categories; 0 for numeric features.
    pub fn category_count(&self) -> usize {
        match &self.kind {
            FeatureKind::Numeric => 0,
            FeatureKind::Categorical { categories } => categories.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
    pub label: ClassId,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    name: String,
    features: Vec<FeatureDescriptor>,
    classes: Vec<String>,
    instances: Vec<Instance>,
}

impl Dataset {
    /// Validates schema consistency: non-empty duplicate-free class list,
    /// every instance with the right arity, labels and category indices in
    /// range, numeric/categorical values matching their column kind.
    pub fn new(
        name: impl Into<String>,
        features: Vec<FeatureDescriptor>,
        classes: Vec<String>,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Argument("dataset needs at least one class".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for c in &classes {
            if !seen.insert(c.as_str()) {
                return Err(Error::Argument(format!("duplicate class label {c:?}")));
            }
        }
        for (i, inst) in instances.iter().enumerate() {
            if inst.values.len() != features.len() {
                return Err(Error::Argument(format!(
                    "instance {i} has {} values, schema has {} features",
                    inst.values.len(),
                    features.len()
                )));
            }
            if inst.label >= classes.len() {
                return Err(Error::Argument(format!(
                    "instance {i} label {} out of range",
                    inst.label
                )));
            }
            for (f, v) in features.iter().zip(&inst.values) {
                match (&f.kind, v) {
                    (_, Value::Missing) => {}
                    (FeatureKind::Numeric, Value::Num(x)) => {
                        if !x.is_finite() {
                            return Err(Error::Argument(format!(
                                "instance {i}, feature {}: non-finite value",
                                f.name
                            )));
                        }
                    }
                    (FeatureKind::Categorical { categories }, Value::Cat(c)) => {
                        if *c >= categories.len() {
                            return Err(Error::Argument(format!(
                                "instance {i}, feature {}: category index {c} out of range",
                                f.name
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::Argument(format!(
                            "instance {i}, feature {}: value kind does not match column kind",
                            f.name
                        )));
                    }
                }
            }
        }
        Ok(Dataset {
            name: name.into(),
            features,
            classes,
            instances,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &[FeatureDescriptor] {
        &self.features
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// Instance indices grouped by class, each group in dataset order.
    pub fn per_class_indices(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.classes.len()];
        for (i, inst) in self.instances.iter().enumerate() {
            groups[inst.label].push(i);
        }
        groups
    }

    /// New dataset holding clones of the given instances (same schema,
    /// same name). Order follows `indices`.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.clone(),
            classes: self.classes.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Dataset {
        self.name = name.into();
        self
    }

    /// Replaces the label of one instance. Panics on out-of-range input;
    /// callers own index validity.
    pub(crate) fn set_label(&mut self, index: usize, label: ClassId) {
        assert!(label < self.classes.len());
        self.instances[index].label = label;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_col_schema() -> Vec<FeatureDescriptor> {
        vec![
            FeatureDescriptor::numeric("x"),
            FeatureDescriptor::categorical("c", &["p", "q"]),
        ]
    }

    #[test]
    fn rejects_arity_mismatch() {
        let err = Dataset::new(
            "t",
            two_col_schema(),
            vec!["a".into()],
            vec![Instance {
                values: vec![Value::Num(1.0)],
                label: 0,
            }],
        )
        .unwrap_err();
        assert!(err.to_string().contains("values"));
    }

    #[test]
    fn rejects_label_and_category_out_of_range() {
        assert!(Dataset::new(
            "t",
            two_col_schema(),
            vec!["a".into()],
            vec![Instance {
                values: vec![Value::Num(1.0), Value::Cat(0)],
                label: 1,
            }],
        )
        .is_err());
        assert!(Dataset::new(
            "t",
            two_col_schema(),
            vec!["a".into()],
            vec![Instance {
                values: vec![Value::Num(1.0), Value::Cat(2)],
                label: 0,
            }],
        )
        .is_err());
    }

    #[test]
    fn rejects_kind_mismatch_and_duplicate_classes() {
        assert!(Dataset::new(
            "t",
            two_col_schema(),
            vec!["a".into()],
            vec![Instance {
                values: vec![Value::Cat(0), Value::Cat(0)],
                label: 0,
            }],
        )
        .is_err());
        assert!(Dataset::new("t", two_col_schema(), vec!["a".into(), "a".into()], vec![]).is_err());
    }

    #[test]
    fn subset_preserves_order_given() {
        let ds = Dataset::new(
            "t",
            vec![FeatureDescriptor::numeric("x")],
            vec!["a".into(), "b".into()],
            (0..5)
                .map(|i| Instance {
                    values: vec![Value::Num(i as f64)],
                    label: i % 2,
                })
                .collect(),
        )
        .unwrap();
        let sub = ds.subset(&[3, 0, 4]);
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.instances()[0].values[0], Value::Num(3.0));
        assert_eq!(sub.instances()[1].values[0], Value::Num(0.0));
        assert_eq!(sub.instances()[2].values[0], Value::Num(4.0));
    }

    #[test]
    fn per_class_indices_partitions() {
        let ds = Dataset::new(
            "t",
            vec![FeatureDescriptor::numeric("x")],
            vec!["a".into(), "b".into()],
            (0..7)
                .map(|i| Instance {
                    values: vec![Value::Num(i as f64)],
                    label: if i < 4 { 0 } else { 1 },
                })
                .collect(),
        )
        .unwrap();
        let groups = ds.per_class_indices();
        assert_eq!(groups[0], vec![0, 1, 2, 3]);
        assert_eq!(groups[1], vec![4, 5, 6]);
    }
}
