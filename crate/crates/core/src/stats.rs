//! Corpus and dataset analyses: definiteness residuals, entity-type and
//! subtype distributions, and confident classifier errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbdt::{GbdtError, GbdtModel};
use crate::harmonize::BridgingSubtype;
use crate::model::{Definiteness, Document, UnifiedType};
use crate::pairgen::{derive_definiteness, PairConfig, PairDataset, PairLabel};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("contingency table is empty")]
    EmptyTable,
    #[error("contingency table has a zero {0} total")]
    Degenerate(&'static str),
    #[error("no bridging links")]
    NoBridging,
    #[error(transparent)]
    Model(#[from] GbdtError),
}

pub const ROW_LABELS: [&str; 2] = ["def", "ind"];
pub const COL_LABELS: [&str; 2] = ["bridge", "non-bridge"];

/// Anaphor definiteness against bridging status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    /// `counts[row][col]`, rows def/ind, columns bridge/non-bridge.
    pub counts: [[u64; 2]; 2],
    /// Examples left out because their anaphor definiteness is `none`.
    pub excluded_none: u64,
}

impl ContingencyTable2x2 {
    pub fn new(counts: [[u64; 2]; 2]) -> Self {
        ContingencyTable2x2 { counts, excluded_none: 0 }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn add(&mut self, def: Definiteness, bridge: bool) {
        let row = match def {
            Definiteness::Def => 0,
            Definiteness::Ind => 1,
            Definiteness::None => {
                self.excluded_none += 1;
                return;
            }
        };
        self.counts[row][usize::from(!bridge)] += 1;
    }

    fn checked(self) -> Result<Self, StatsError> {
        if self.total() == 0 {
            Err(StatsError::EmptyTable)
        } else {
            Ok(self)
        }
    }
}

/// Count pair examples by anaphor definiteness and whether the pair is
/// bridging.
pub fn definiteness_contingency(dataset: &PairDataset) -> Result<ContingencyTable2x2, StatsError> {
    let mut t = ContingencyTable2x2::default();
    for e in &dataset.examples {
        t.add(e.features.n_definite, e.label == PairLabel::Bridging);
    }
    t.checked()
}

/// Count mentions by definiteness and whether they are a bridging anaphor.
pub fn corpus_definiteness_contingency(docs: &[Document], config: &PairConfig) -> Result<ContingencyTable2x2, StatsError> {
    let mut t = ContingencyTable2x2::default();
    for doc in docs {
        for m in &doc.mentions {
            let def = match m.definiteness {
                Definiteness::None if config.derive_missing => derive_definiteness(doc, m, &config.pronoun_tags),
                d => d,
            };
            let bridge = doc.bridging.iter().any(|l| l.anaphor_id == m.id);
            t.add(def, bridge);
        }
    }
    t.checked()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub observed: [[u64; 2]; 2],
    pub expected: [[f64; 2]; 2],
    pub residuals: [[f64; 2]; 2],
    pub adjusted: bool,
    /// Pearson chi-square statistic.
    pub chi_square: f64,
}

/// Pearson residuals `(O - E) / sqrt(E)`; with `adjusted`, each residual is
/// further divided by `sqrt((1 - row/N)(1 - col/N))`.
pub fn chi_square_residuals(table: &ContingencyTable2x2, adjusted: bool) -> Result<ResidualTable, StatsError> {
    let o = table.counts;
    let n = table.total() as f64;
    if n == 0.0 {
        return Err(StatsError::EmptyTable);
    }
    let rows = [(o[0][0] + o[0][1]) as f64, (o[1][0] + o[1][1]) as f64];
    let cols = [(o[0][0] + o[1][0]) as f64, (o[0][1] + o[1][1]) as f64];
    if rows.contains(&0.0) {
        return Err(StatsError::Degenerate("row"));
    }
    if cols.contains(&0.0) {
        return Err(StatsError::Degenerate("column"));
    }
    let mut expected = [[0.0; 2]; 2];
    let mut residuals = [[0.0; 2]; 2];
    let mut chi_square = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            let diff = o[i][j] as f64 - e;
            let mut r = diff / e.sqrt();
            chi_square += diff * diff / e;
            if adjusted {
                r /= ((1.0 - rows[i] / n) * (1.0 - cols[j] / n)).sqrt();
            }
            expected[i][j] = e;
            residuals[i][j] = r;
        }
    }
    Ok(ResidualTable { observed: o, expected, residuals, adjusted, chi_square })
}

impl ResidualTable {
    /// Sign of each residual in row-major order.
    pub fn signs(&self) -> [i8; 4] {
        let s = |v: f64| if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 };
        [
            s(self.residuals[0][0]),
            s(self.residuals[0][1]),
            s(self.residuals[1][0]),
            s(self.residuals[1][1]),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("definiteness,bridging,observed,expected,residual\n");
        for (i, r) in ROW_LABELS.iter().enumerate() {
            for (j, c) in COL_LABELS.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{r},{c},{},{},{}",
                    self.observed[i][j], self.expected[i][j], self.residuals[i][j]
                );
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<8}{:>14}{:>14}\n", "", COL_LABELS[0], COL_LABELS[1]);
        for (i, r) in ROW_LABELS.iter().enumerate() {
            let _ = writeln!(out, "{r:<8}{:>14.1}{:>14.1}", self.residuals[i][0], self.residuals[i][1]);
        }
        out
    }
}

pub const DEFAULT_DISPLAY_THRESHOLD: f64 = 0.01;

/// Proportion of bridging pairs per (antecedent type, anaphor type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTypeDistribution {
    pub types: Vec<UnifiedType>,
    /// `counts[ante][ana]` indexed by `types`.
    pub counts: Vec<Vec<usize>>,
    pub proportions: Vec<Vec<f64>>,
    pub total: usize,
    pub threshold: f64,
}

impl PairTypeDistribution {
    fn index(&self, t: UnifiedType) -> usize {
        self.types.iter().position(|&x| x == t).expect("type in grid")
    }

    pub fn proportion(&self, ante: UnifiedType, ana: UnifiedType) -> f64 {
        self.proportions[self.index(ante)][self.index(ana)]
    }

    pub fn count(&self, ante: UnifiedType, ana: UnifiedType) -> usize {
        self.counts[self.index(ante)][self.index(ana)]
    }

    /// Cells at or above the threshold are shown.
    pub fn visible(&self, ante: UnifiedType, ana: UnifiedType) -> bool {
        self.proportion(ante, ana) >= self.threshold
    }

    /// Long-format heatmap data.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ante_type,ana_type,count,proportion,visible_flag\n");
        for &a in &self.types {
            for &b in &self.types {
                let _ = writeln!(
                    out,
                    "{a},{b},{},{},{}",
                    self.count(a, b),
                    self.proportion(a, b),
                    u8::from(self.visible(a, b))
                );
            }
        }
        out
    }

    /// Percentage grid; hidden cells print as `.`.
    pub fn to_text(&self) -> String {
        let width = 8;
        let mut out = format!("{:<14}", "ante \\ ana");
        for t in &self.types {
            let _ = write!(out, "{:>width$}", abbreviate(t.as_str()));
        }
        out.push('\n');
        for &a in &self.types {
            let _ = write!(out, "{:<14}", a.as_str());
            for &b in &self.types {
                let cell = if self.visible(a, b) && self.count(a, b) > 0 {
                    format!("{:.1}", 100.0 * self.proportion(a, b))
                } else {
                    ".".to_string()
                };
                let _ = write!(out, "{cell:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

fn abbreviate(s: &str) -> &str {
    &s[..s.len().min(7)]
}

/// Every (antecedent, anaphor) pair of every bridging link; split
/// antecedents contribute one pair per antecedent.
pub fn entity_pair_distribution(docs: &[Document], threshold: f64) -> Result<PairTypeDistribution, StatsError> {
    let types: Vec<UnifiedType> = UnifiedType::ALL.to_vec();
    let n = types.len();
    let mut counts = vec![vec![0usize; n]; n];
    let idx = |t: UnifiedType| types.iter().position(|&x| x == t).expect("type in grid");
    let mut total = 0;
    for doc in docs {
        for link in &doc.bridging {
            let Some(ana) = doc.mention(&link.anaphor_id) else { continue };
            for ante_id in &link.antecedent_ids {
                let Some(ante) = doc.mention(ante_id) else { continue };
                counts[idx(ante.entity_type_unified)][idx(ana.entity_type_unified)] += 1;
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(StatsError::NoBridging);
    }
    let proportions = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / total as f64).collect())
        .collect();
    Ok(PairTypeDistribution { types, counts, proportions, total, threshold })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: String,
    pub count: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub rows: Vec<LabelCount>,
    pub total: usize,
}

impl Distribution {
    fn from_counts(counts: Vec<(String, usize)>) -> Self {
        let total = counts.iter().map(|c| c.1).sum();
        let rows = counts
            .into_iter()
            .map(|(label, count)| LabelCount {
                label,
                count,
                proportion: if total == 0 { 0.0 } else { count as f64 / total as f64 },
            })
            .collect();
        Distribution { rows, total }
    }

    pub fn get(&self, label: &str) -> Option<&LabelCount> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,count,proportion\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.label, r.count, r.proportion);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(out, "{:<16}{:>6}  ({:.0}%)", r.label, r.count, 100.0 * r.proportion);
        }
        let _ = writeln!(out, "{:<16}{:>6}", "total", self.total);
        out
    }
}

/// Unified entity type of each bridging anaphor, one count per link.
pub fn anaphor_entity_distribution(docs: &[Document]) -> Distribution {
    let mut counts: BTreeMap<UnifiedType, usize> = BTreeMap::new();
    for doc in docs {
        for link in &doc.bridging {
            if let Some(m) = doc.mention(&link.anaphor_id) {
                *counts.entry(m.entity_type_unified).or_default() += 1;
            }
        }
    }
    Distribution::from_counts(
        UnifiedType::ALL
            .iter()
            .map(|t| (t.as_str().to_string(), counts.get(t).copied().unwrap_or(0)))
            .collect(),
    )
}

pub const UNMARKED: &str = "unmarked";

/// Subtype label of each link; labels outside the inventory follow the
/// known ones in sorted order.
pub fn subtype_distribution(docs: &[Document]) -> Distribution {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        for link in &doc.bridging {
            let label = match link.subtype.as_deref() {
                None => UNMARKED.to_string(),
                Some(s) => s.parse::<BridgingSubtype>().map_or_else(|_| s.to_string(), |t| t.as_str().to_string()),
            };
            *counts.entry(label).or_default() += 1;
        }
    }
    let mut rows: Vec<(String, usize)> = BridgingSubtype::ALL
        .iter()
        .map(|t| t.as_str())
        .chain([UNMARKED])
        .map(|l| (l.to_string(), counts.remove(l).unwrap_or(0)))
        .collect();
    rows.extend(counts);
    Distribution::from_counts(rows)
}

pub const DEFAULT_TAU: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidentError {
    pub doc_id: String,
    pub antecedent_id: String,
    pub anaphor_id: String,
    pub probability: f64,
}

/// Gold bridging examples whose probability is below `tau`, lowest first.
pub fn confident_errors_from_probabilities(dataset: &PairDataset, probabilities: &[f64], tau: f64) -> Vec<ConfidentError> {
    let mut out: Vec<ConfidentError> = dataset
        .examples
        .iter()
        .zip(probabilities)
        .filter(|(e, &p)| e.label == PairLabel::Bridging && p < tau)
        .map(|(e, &p)| ConfidentError {
            doc_id: e.doc_id.clone(),
            antecedent_id: e.antecedent_id.clone(),
            anaphor_id: e.anaphor_id.clone(),
            probability: p,
        })
        .collect();
    out.sort_by(|a, b| {
        a.probability
            .total_cmp(&b.probability)
            .then_with(|| (&a.doc_id, &a.antecedent_id, &a.anaphor_id).cmp(&(&b.doc_id, &b.antecedent_id, &b.anaphor_id)))
    });
    out
}

pub fn confident_errors(model: &GbdtModel, dataset: &PairDataset, tau: f64) -> Result<Vec<ConfidentError>, StatsError> {
    if dataset.is_empty() {
        return Ok(Vec::new());
    }
    let x = model.schema.encode_all(dataset);
    let probs = model.predict_matrix(&x)?;
    Ok(confident_errors_from_probabilities(dataset, &probs, tau))
}

pub fn confident_errors_csv(errors: &[ConfidentError]) -> String {
    let mut out = String::from("doc_id,antecedent_id,anaphor_id,probability\n");
    for e in errors {
        let _ = writeln!(out, "{},{},{},{}", e.doc_id, e.antecedent_id, e.anaphor_id, e.probability);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::*;
    use crate::model::BridgingLink;
    use crate::synth::example_with;
    use proptest::prelude::*;

    fn example(def: Definiteness, label: PairLabel) -> crate::pairgen::PairExample {
        let mut e = example_with(|f| f.n_definite = def);
        e.label = label;
        e
    }

    #[test]
    fn direct_counting() {
        let ds = PairDataset {
            provenance: Default::default(),
            examples: vec![
                example(Definiteness::Def, PairLabel::Bridging),
                example(Definiteness::Def, PairLabel::Coref),
                example(Definiteness::Ind, PairLabel::Bridging),
                example(Definiteness::Ind, PairLabel::None),
                example(Definiteness::None, PairLabel::None),
            ],
        };
        let t = definiteness_contingency(&ds).unwrap();
        assert_eq!(t.counts, [[1, 1], [1, 1]]);
        assert_eq!(t.excluded_none, 1);
    }

    #[test]
    fn only_definite_anaphors() {
        let ds = PairDataset {
            provenance: Default::default(),
            examples: vec![example(Definiteness::Def, PairLabel::Bridging), example(Definiteness::Def, PairLabel::None)],
        };
        let t = definiteness_contingency(&ds).unwrap();
        assert_eq!(t.counts[1], [0, 0]);
        assert!(matches!(chi_square_residuals(&t, false), Err(StatsError::Degenerate("row"))));
        let empty = PairDataset { provenance: Default::default(), examples: vec![example(Definiteness::None, PairLabel::None)] };
        assert!(matches!(definiteness_contingency(&empty), Err(StatsError::EmptyTable)));
    }

    #[test]
    fn residual_oracles() {
        let r = chi_square_residuals(&ContingencyTable2x2::new([[25, 25], [25, 25]]), false).unwrap();
        assert_eq!(r.residuals, [[0.0; 2]; 2]);
        let r = chi_square_residuals(&ContingencyTable2x2::new([[40, 10], [10, 40]]), false).unwrap();
        for (got, want) in r.residuals.iter().flatten().zip([3.0, -3.0, -3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((r.chi_square - 36.0).abs() < 1e-12);
        let r = chi_square_residuals(&ContingencyTable2x2::new([[0, 50], [50, 0]]), false).unwrap();
        for (got, want) in r.residuals.iter().flatten().zip([-5.0, 5.0, 5.0, -5.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // Adjusted residuals of a 2x2 table all equal sqrt(chi^2) in magnitude.
        let r = chi_square_residuals(&ContingencyTable2x2::new([[40, 10], [10, 40]]), true).unwrap();
        assert!((r.residuals[0][0] - 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn residual_symmetry_and_weighted_sum(a in 1u64..500, b in 1u64..500, c in 1u64..500, d in 1u64..500) {
            let r = chi_square_residuals(&ContingencyTable2x2::new([[a, b], [c, d]]), false).unwrap();
            let swapped = chi_square_residuals(&ContingencyTable2x2::new([[c, d], [a, b]]), false).unwrap();
            for j in 0..2 {
                prop_assert!((r.residuals[0][j] - swapped.residuals[1][j]).abs() < 1e-9);
                prop_assert!((r.residuals[1][j] - swapped.residuals[0][j]).abs() < 1e-9);
            }
            let weighted: f64 = (0..4).map(|k| r.residuals[k / 2][k % 2] * r.expected[k / 2][k % 2].sqrt()).sum();
            prop_assert!(weighted.abs() < 1e-6);
        }
    }

    fn typed_doc(types: &[UnifiedType], links: &[(usize, usize, Option<&str>)]) -> Document {
        let mut doc = flat_doc(types.len());
        for (i, &t) in types.iter().enumerate() {
            let mut m = mention(&format!("m{i}"), &[(i + 1, i + 1)], None);
            m.entity_type_unified = t;
            doc.mentions.push(m);
        }
        for &(a, b, s) in links {
            doc.bridging.push(BridgingLink::new(&format!("m{b}"), &[&format!("m{a}")], s));
        }
        doc
    }

    #[test]
    fn pair_distribution() {
        use UnifiedType::*;
        let links: Vec<(usize, usize, Option<&str>)> = (0..10).map(|i| (0, i + 1, None)).collect();
        let doc = typed_doc(&[Place; 11], &links);
        let d = entity_pair_distribution(&[doc], 0.01).unwrap();
        assert_eq!(d.proportion(Place, Place), 1.0);
        let sum: f64 = d.proportions.iter().flatten().sum();
        assert!((sum - 1.0).abs() < 1e-9);

        let doc = typed_doc(&[Place, Person, Place], &[(0, 1, None), (0, 2, None)]);
        let d = entity_pair_distribution(&[doc], 0.5).unwrap();
        assert!(d.visible(Place, Person) && d.visible(Place, Place));
        assert!(d.to_csv().contains("place,person,1,0.5,1"));
        assert!(matches!(entity_pair_distribution(&[flat_doc(2)], 0.01), Err(StatsError::NoBridging)));
    }

    #[test]
    fn anaphor_and_subtype_distributions() {
        use UnifiedType::*;
        let doc = typed_doc(
            &[Place, Person, Person, Place, Time],
            &[(0, 1, Some("element")), (0, 2, Some("element")), (0, 3, Some("poss")), (0, 4, None)],
        );
        let d = anaphor_entity_distribution(std::slice::from_ref(&doc));
        assert_eq!(d.get("person").unwrap().count, 2);
        assert!((d.get("person").unwrap().proportion - 0.5).abs() < 1e-12);
        assert_eq!(d.get("organization").unwrap().count, 0);

        let s = subtype_distribution(&[doc]);
        assert_eq!(s.get("element").unwrap().count, 2);
        assert_eq!(s.get("poss").unwrap().proportion, 0.25);
        assert_eq!(s.get("unmarked").unwrap().proportion, 0.25);
        assert_eq!(s.rows[9].label, "unmarked");
    }

    #[test]
    fn three_anaphor_shares() {
        use UnifiedType::*;
        let doc = typed_doc(&[Time, Person, Person, Place], &[(0, 1, None), (0, 2, None), (0, 3, None)]);
        let d = anaphor_entity_distribution(&[doc]);
        assert_eq!(d.get("person").unwrap().count, 2);
        assert!(d.to_text().contains("(67%)"));
        assert!(d.to_text().contains("(33%)"));
    }

    #[test]
    fn confident_error_filter_and_order() {
        let ds = PairDataset {
            provenance: Default::default(),
            examples: (0..4)
                .map(|i| {
                    let mut e = example(Definiteness::Def, if i < 3 { PairLabel::Bridging } else { PairLabel::None });
                    e.anaphor_id = format!("a{i}");
                    e
                })
                .collect(),
        };
        let errors = confident_errors_from_probabilities(&ds, &[0.02, 0.5, 0.08, 0.01], 0.10);
        let probs: Vec<f64> = errors.iter().map(|e| e.probability).collect();
        assert_eq!(probs, vec![0.02, 0.08]);
        assert_eq!(errors[1].anaphor_id, "a2");
        assert!(confident_errors_from_probabilities(&ds, &[0.5, 0.5, 0.5, 0.01], 0.10).is_empty());
    }
}
