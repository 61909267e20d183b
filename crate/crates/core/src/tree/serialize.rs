//! Self-describing text serialization for tree models.
//!
//! One node per line: `<id> split <feature> <threshold> <gain> <left>
//! <right>` or `<id> leaf <payload...>`. Floats use shortest round-trip
//! form, so save-then-load reproduces a model exactly.

use std::fmt::Write as _;

use super::{
    ClassLeaf, DecisionTree, ForestHyperparams, GbmHyperparams, GradientBoostedModel, Node,
    RandomForestModel, ScoreTree, Tree, TreeError,
};
use crate::NUM_CLASSES;

/// A deserialized tree model of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum TextModel {
    Forest(RandomForestModel),
    Gbm(GradientBoostedModel),
}

/// Serializes a forest or boosted model to the text format.
pub fn model_to_text(model: &TextModel) -> String {
    match model {
        TextModel::Forest(m) => forest_to_text(m),
        TextModel::Gbm(m) => gbm_to_text(m),
    }
}

/// Parses either tree-model family, dispatching on the `model` header line.
pub fn load_model_text(text: &str) -> Result<TextModel, TreeError> {
    let first = text.lines().next().unwrap_or("");
    match first.trim() {
        "model forest" => Ok(TextModel::Forest(forest_from_text(text)?)),
        "model gbm" => Ok(TextModel::Gbm(gbm_from_text(text)?)),
        other => Err(TreeError::ParseModel {
            line: 1,
            message: format!("unknown model header `{other}`"),
        }),
    }
}

fn write_header(out: &mut String, names: &[String], seed: u64) {
    let _ = writeln!(out, "n_features {}", names.len());
    for (i, name) in names.iter().enumerate() {
        let _ = writeln!(out, "feature {i} {name}");
    }
    let _ = writeln!(out, "seed {seed}");
}

fn write_nodes<L>(out: &mut String, tree: &Tree<L>, leaf: impl Fn(&L) -> String) {
    for (id, node) in tree.nodes.iter().enumerate() {
        match node {
            Node::Split { feature, threshold, gain, left, right } => {
                let _ = writeln!(out, "{id} split {feature} {threshold} {gain} {left} {right}");
            }
            Node::Leaf(payload) => {
                let _ = writeln!(out, "{id} leaf {}", leaf(payload));
            }
        }
    }
    let _ = writeln!(out, "end");
}

fn forest_to_text(model: &RandomForestModel) -> String {
    let mut out = String::from("model forest\n");
    write_header(&mut out, &model.feature_names, model.seed);
    let hp = &model.hyperparams;
    let _ = writeln!(out, "n_trees {}", hp.n_trees);
    let _ = writeln!(out, "max_depth {}", hp.max_depth);
    let _ = writeln!(out, "min_samples_leaf {}", hp.min_samples_leaf);
    let _ = writeln!(
        out,
        "features_per_split {}",
        hp.features_per_split.map_or("auto".to_string(), |m| m.to_string())
    );
    let _ = writeln!(out, "bootstrap_fraction {}", hp.bootstrap_fraction);
    let _ = writeln!(out, "bootstrap {}", hp.bootstrap);
    for (t, tree) in model.trees.iter().enumerate() {
        let _ = writeln!(out, "tree {t}");
        write_nodes(&mut out, tree, |leaf: &ClassLeaf| {
            let dist: Vec<String> = leaf.distribution.iter().map(f64::to_string).collect();
            format!("{} {}", dist.join(" "), leaf.n_rows)
        });
    }
    out
}

fn gbm_to_text(model: &GradientBoostedModel) -> String {
    let mut out = String::from("model gbm\n");
    write_header(&mut out, &model.feature_names, model.seed);
    let hp = &model.hyperparams;
    let _ = writeln!(out, "n_rounds {}", hp.n_rounds);
    let _ = writeln!(out, "learning_rate {}", hp.learning_rate);
    let _ = writeln!(out, "max_depth {}", hp.max_depth);
    let _ = writeln!(out, "lambda_l2 {}", hp.lambda_l2);
    let _ = writeln!(out, "gamma_split {}", hp.gamma_split);
    let _ = writeln!(out, "column_subsample {}", hp.column_subsample);
    let _ = writeln!(out, "min_child_weight {}", hp.min_child_weight);
    let base: Vec<String> = model.base_score.iter().map(f64::to_string).collect();
    let _ = writeln!(out, "base_score {}", base.join(" "));
    let loss: Vec<String> = model.train_loss.iter().map(f64::to_string).collect();
    let _ = writeln!(out, "train_loss {}", loss.join(" "));
    for (r, round) in model.rounds.iter().enumerate() {
        for (c, tree) in round.iter().enumerate() {
            let _ = writeln!(out, "tree {r} {c}");
            write_nodes(&mut out, tree, f64::to_string);
        }
    }
    out
}

struct Parser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self { lines: text.lines().enumerate(), current: 0 }
    }

    fn err(&self, message: impl Into<String>) -> TreeError {
        TreeError::ParseModel { line: self.current, message: message.into() }
    }

    fn next_line(&mut self) -> Result<&'a str, TreeError> {
        for (i, line) in self.lines.by_ref() {
            self.current = i + 1;
            if !line.trim().is_empty() {
                return Ok(line.trim());
            }
        }
        self.current += 1;
        Err(TreeError::ParseModel { line: self.current, message: "unexpected end of input".into() })
    }

    /// Reads `key value...` returning the value fields; errors when the key
    /// differs.
    fn keyed<'b>(&mut self, key: &str, line: &'b str) -> Result<Vec<&'b str>, TreeError> {
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key} ...`, got `{line}`")));
        }
        Ok(parts.collect())
    }

    fn expect_kv(&mut self, key: &str) -> Result<String, TreeError> {
        let line = self.next_line()?;
        let fields = self.keyed(key, line)?;
        if fields.len() != 1 {
            return Err(self.err(format!("expected one value for `{key}`")));
        }
        Ok(fields[0].to_string())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T, TreeError> {
        s.parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }

    fn header(&mut self) -> Result<(Vec<String>, u64), TreeError> {
        let n: usize = {
            let v = self.expect_kv("n_features")?;
            self.parse(&v)?
        };
        let mut names = Vec::with_capacity(n);
        for i in 0..n {
            let line = self.next_line()?;
            let fields = self.keyed("feature", line)?;
            if fields.len() != 2 || self.parse::<usize>(fields[0])? != i {
                return Err(self.err("feature lines must be `feature <index> <name>` in order"));
            }
            names.push(fields[1].to_string());
        }
        let seed_str = self.expect_kv("seed")?;
        let seed = self.parse(&seed_str)?;
        Ok((names, seed))
    }

    fn nodes<L>(
        &mut self,
        max_depth: usize,
        min_samples_leaf: usize,
        leaf: impl Fn(&Self, &[&str]) -> Result<L, TreeError>,
    ) -> Result<Tree<L>, TreeError> {
        let mut nodes = Vec::new();
        loop {
            let line = self.next_line()?;
            if line == "end" {
                break;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 {
                return Err(self.err("node line too short"));
            }
            let id: usize = self.parse(fields[0])?;
            if id != nodes.len() {
                return Err(self.err(format!("node ids must be sequential, got {id}")));
            }
            match fields[1] {
                "split" => {
                    if fields.len() != 7 {
                        return Err(self.err("split line needs 7 fields"));
                    }
                    nodes.push(Node::Split {
                        feature: self.parse(fields[2])?,
                        threshold: self.parse(fields[3])?,
                        gain: self.parse(fields[4])?,
                        left: self.parse(fields[5])?,
                        right: self.parse(fields[6])?,
                    });
                }
                "leaf" => nodes.push(Node::Leaf(leaf(self, &fields[2..])?)),
                other => return Err(self.err(format!("unknown node kind `{other}`"))),
            }
        }
        if nodes.is_empty() {
            return Err(self.err("tree has no nodes"));
        }
        for node in &nodes {
            if let Node::Split { left, right, .. } = node {
                if *left >= nodes.len() || *right >= nodes.len() {
                    return Err(self.err("child id out of range"));
                }
            }
        }
        Ok(Tree { nodes, max_depth, min_samples_leaf })
    }
}

fn class_leaf(parser: &Parser<'_>, fields: &[&str]) -> Result<ClassLeaf, TreeError> {
    if fields.len() != NUM_CLASSES + 1 {
        return Err(parser.err(format!("class leaf needs {} fields", NUM_CLASSES + 1)));
    }
    let mut distribution = [0.0; NUM_CLASSES];
    for (v, f) in distribution.iter_mut().zip(fields) {
        *v = parser.parse(f)?;
    }
    Ok(ClassLeaf { distribution, n_rows: parser.parse(fields[NUM_CLASSES])? })
}

fn forest_from_text(text: &str) -> Result<RandomForestModel, TreeError> {
    let mut parser = Parser::new(text);
    let _ = parser.next_line()?; // model header
    let (feature_names, seed) = parser.header()?;
    let n_trees: usize = {
        let v = parser.expect_kv("n_trees")?;
        parser.parse(&v)?
    };
    let max_depth: usize = {
        let v = parser.expect_kv("max_depth")?;
        parser.parse(&v)?
    };
    let min_samples_leaf: usize = {
        let v = parser.expect_kv("min_samples_leaf")?;
        parser.parse(&v)?
    };
    let features_per_split = {
        let v = parser.expect_kv("features_per_split")?;
        if v == "auto" { None } else { Some(parser.parse(&v)?) }
    };
    let bootstrap_fraction: f64 = {
        let v = parser.expect_kv("bootstrap_fraction")?;
        parser.parse(&v)?
    };
    let bootstrap: bool = {
        let v = parser.expect_kv("bootstrap")?;
        parser.parse(&v)?
    };
    let mut trees: Vec<DecisionTree> = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let line = parser.next_line()?;
        let fields = parser.keyed("tree", line)?;
        if fields.len() != 1 || parser.parse::<usize>(fields[0])? != t {
            return Err(parser.err(format!("expected `tree {t}`")));
        }
        trees.push(parser.nodes(max_depth, min_samples_leaf, class_leaf)?);
    }
    Ok(RandomForestModel {
        trees,
        hyperparams: ForestHyperparams {
            n_trees,
            max_depth,
            min_samples_leaf,
            features_per_split,
            bootstrap_fraction,
            bootstrap,
        },
        seed,
        feature_names,
    })
}

fn gbm_from_text(text: &str) -> Result<GradientBoostedModel, TreeError> {
    let mut parser = Parser::new(text);
    let _ = parser.next_line()?; // model header
    let (feature_names, seed) = parser.header()?;
    let n_rounds: usize = {
        let v = parser.expect_kv("n_rounds")?;
        parser.parse(&v)?
    };
    let learning_rate: f64 = {
        let v = parser.expect_kv("learning_rate")?;
        parser.parse(&v)?
    };
    let max_depth: usize = {
        let v = parser.expect_kv("max_depth")?;
        parser.parse(&v)?
    };
    let lambda_l2: f64 = {
        let v = parser.expect_kv("lambda_l2")?;
        parser.parse(&v)?
    };
    let gamma_split: f64 = {
        let v = parser.expect_kv("gamma_split")?;
        parser.parse(&v)?
    };
    let column_subsample: f64 = {
        let v = parser.expect_kv("column_subsample")?;
        parser.parse(&v)?
    };
    let min_child_weight: f64 = {
        let v = parser.expect_kv("min_child_weight")?;
        parser.parse(&v)?
    };
    let base_line = parser.next_line()?;
    let base_fields = parser.keyed("base_score", base_line)?;
    if base_fields.len() != NUM_CLASSES {
        return Err(parser.err("base_score needs 6 values"));
    }
    let mut base_score = [0.0; NUM_CLASSES];
    for (v, f) in base_score.iter_mut().zip(&base_fields) {
        *v = parser.parse(f)?;
    }
    let loss_line = parser.next_line()?;
    let loss_fields = parser.keyed("train_loss", loss_line)?;
    let train_loss: Vec<f64> =
        loss_fields.iter().map(|f| parser.parse(f)).collect::<Result<_, _>>()?;

    let mut rounds: Vec<Vec<ScoreTree>> = Vec::with_capacity(n_rounds);
    for r in 0..n_rounds {
        let mut class_trees = Vec::with_capacity(NUM_CLASSES);
        for c in 0..NUM_CLASSES {
            let line = parser.next_line()?;
            let fields = parser.keyed("tree", line)?;
            if fields.len() != 2
                || parser.parse::<usize>(fields[0])? != r
                || parser.parse::<usize>(fields[1])? != c
            {
                return Err(parser.err(format!("expected `tree {r} {c}`")));
            }
            class_trees.push(parser.nodes(max_depth, 1, |p, f| {
                if f.len() != 1 {
                    return Err(p.err("score leaf needs 1 field"));
                }
                p.parse(f[0])
            })?);
        }
        rounds.push(class_trees);
    }
    Ok(GradientBoostedModel {
        rounds,
        base_score,
        hyperparams: GbmHyperparams {
            n_rounds,
            learning_rate,
            max_depth,
            lambda_l2,
            gamma_split,
            column_subsample,
            min_child_weight,
        },
        seed,
        feature_names,
        train_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::forest::tests::blob_data;
    use crate::tree::{fit_gbm, fit_random_forest};

    #[test]
    fn forest_round_trip_is_exact() {
        let data = blob_data(90, 61);
        let hp = ForestHyperparams { n_trees: 7, ..Default::default() };
        let model = fit_random_forest(&data, &hp, 13).unwrap();
        let text = model_to_text(&TextModel::Forest(model.clone()));
        match load_model_text(&text).unwrap() {
            TextModel::Forest(back) => assert_eq!(back, model),
            _ => panic!("wrong family"),
        }
    }

    #[test]
    fn gbm_round_trip_is_exact() {
        let data = blob_data(90, 62);
        let hp = GbmHyperparams { n_rounds: 4, ..Default::default() };
        let model = fit_gbm(&data, &hp, 17).unwrap();
        let text = model_to_text(&TextModel::Gbm(model.clone()));
        match load_model_text(&text).unwrap() {
            TextModel::Gbm(back) => assert_eq!(back, model),
            _ => panic!("wrong family"),
        }
    }

    #[test]
    fn unknown_header_is_rejected() {
        assert!(matches!(
            load_model_text("model nonsense\n"),
            Err(TreeError::ParseModel { line: 1, .. })
        ));
    }

    #[test]
    fn truncated_input_reports_line() {
        let data = blob_data(30, 63);
        let hp = ForestHyperparams { n_trees: 2, ..Default::default() };
        let model = fit_random_forest(&data, &hp, 1).unwrap();
        let text = model_to_text(&TextModel::Forest(model));
        let truncated: String =
            text.lines().take(12).map(|l| format!("{l}\n")).collect();
        assert!(load_model_text(&truncated).is_err());
    }
}
