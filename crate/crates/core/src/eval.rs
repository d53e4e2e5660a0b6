//! Input-IoU binned evaluation with significance-aware best-method marking.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::index;
use rayon::prelude::*;

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::noise::NoiseKind;
use crate::seed;
use crate::shape::{iou, BinaryShape};
use crate::stats::paired_one_sided_t_test;

pub const DEFAULT_BIN_CAP: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Bin edges `0.5, 0.6, ..., 1.0`.
pub fn default_edges() -> Vec<f64> {
    vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}

/// Edges `lo, lo + step, ..., hi`, snapped to a `1e-9` grid so that decimal
/// steps land on the same doubles as their literals.
pub fn edges_from_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi > lo) {
        return Err(Error::param(format!("bad bin range {lo}:{hi}:{step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    let snap = |x: f64| (x * 1e9).round() / 1e9;
    let mut edges: Vec<f64> = (0..=count).map(|i| snap(lo + i as f64 * step)).collect();
    if (edges[count] - hi).abs() > 1e-9 {
        edges.push(snap(hi));
    }
    Ok(edges)
}

#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub item_id: String,
    pub truth: Arc<BinaryShape>,
    pub noisy: Arc<BinaryShape>,
    pub input_iou: f64,
    pub noise_kind: NoiseKind,
}

impl EvalRecord {
    pub fn new(
        item_id: impl Into<String>,
        truth: Arc<BinaryShape>,
        noisy: Arc<BinaryShape>,
        noise_kind: NoiseKind,
    ) -> Result<Self> {
        let input_iou = iou(&truth, &noisy)?;
        Ok(Self {
            item_id: item_id.into(),
            truth,
            noisy,
            input_iou,
            noise_kind,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EvalBin {
    pub lo: f64,
    pub hi: f64,
    /// Whether `hi` itself belongs to the bin (true for the last bin).
    pub closed: bool,
    pub records: Vec<EvalRecord>,
    pub cap: usize,
    pub sample_seed: u64,
}

impl EvalBin {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && (v < self.hi || (self.closed && v == self.hi))
    }
}

/// Partitions records into `[lo, hi)` bins (the last one closed) by input
/// IoU, discarding records outside `[edges[0], edges[last]]`. Bins larger
/// than `cap` are subsampled uniformly without replacement; retained records
/// keep their input order.
pub fn bin_by_input_iou(records: Vec<EvalRecord>, edges: &[f64], cap: usize, seed: u64) -> Result<Vec<EvalBin>> {
    if edges.len() < 2 {
        return Err(Error::param("need at least two bin edges"));
    }
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::UnsortedEdges);
    }
    let last = edges.len() - 2;
    let mut bins: Vec<EvalBin> = edges
        .windows(2)
        .enumerate()
        .map(|(i, w)| EvalBin {
            lo: w[0],
            hi: w[1],
            closed: i == last,
            records: Vec::new(),
            cap,
            sample_seed: seed::mix(seed, i as u64),
        })
        .collect();
    for r in records {
        let v = r.input_iou;
        if v < edges[0] || v > edges[last + 1] {
            continue;
        }
        // First edge strictly greater than v; the bin starts one before it.
        let upper = edges.partition_point(|&e| e <= v);
        let idx = upper.saturating_sub(1).min(last);
        bins[idx].records.push(r);
    }
    for bin in &mut bins {
        if bin.records.len() > cap {
            let mut rng = seed::rng(bin.sample_seed);
            let mut keep = index::sample(&mut rng, bin.records.len(), cap).into_vec();
            keep.sort_unstable();
            let mut taken: Vec<Option<EvalRecord>> = std::mem::take(&mut bin.records).into_iter().map(Some).collect();
            bin.records = keep
                .into_iter()
                .map(|i| taken[i].take().expect("unique index"))
                .collect();
        }
    }
    Ok(bins)
}

/// One method's scores on one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinScores {
    pub lo: f64,
    pub hi: f64,
    pub mean_iou: f64,
    /// `(item_id, iou(output, truth))` in record order.
    pub per_record: Vec<(String, f64)>,
    /// Items whose denoiser call failed; each is scored 0.
    pub failed: Vec<String>,
}

impl BinScores {
    pub fn n(&self) -> usize {
        self.per_record.len()
    }

    pub fn ious(&self) -> Vec<f64> {
        self.per_record.iter().map(|(_, v)| *v).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodScores {
    pub name: String,
    pub bins: Vec<BinScores>,
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Scores one denoiser on every record of every bin. Per-record work runs
/// on the current rayon pool; results are collected in record order.
pub fn evaluate_method(denoiser: &dyn Denoiser, bins: &[EvalBin]) -> Result<MethodScores> {
    score_bins(denoiser.name(), bins, |r| {
        Ok(denoiser.denoise(&r.noisy).ok().and_then(|out| iou(&out, &r.truth).ok()))
    })
}

/// Scores precomputed outputs. `predict` returns the output IoU for a
/// record, `None` for a failed or missing output (scored 0 and flagged), or
/// an error that aborts the whole evaluation.
pub fn score_bins<F>(name: &str, bins: &[EvalBin], predict: F) -> Result<MethodScores>
where
    F: Fn(&EvalRecord) -> Result<Option<f64>> + Sync,
{
    if bins.is_empty() {
        return Err(Error::param("no bins to evaluate"));
    }
    let bins = bins
        .iter()
        .map(|bin| {
            let scored: Vec<(String, Option<f64>)> = bin
                .records
                .par_iter()
                .map(|r| Ok((r.item_id.clone(), predict(r)?)))
                .collect::<Result<_>>()?;
            let failed = scored
                .iter()
                .filter(|(_, v)| v.is_none())
                .map(|(id, _)| id.clone())
                .collect();
            let per_record: Vec<(String, f64)> = scored.into_iter().map(|(id, v)| (id, v.unwrap_or(0.0))).collect();
            let values: Vec<f64> = per_record.iter().map(|(_, v)| *v).collect();
            Ok(BinScores {
                lo: bin.lo,
                hi: bin.hi,
                mean_iou: mean(&values),
                per_record,
                failed,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MethodScores {
        name: name.to_string(),
        bins,
    })
}

/// Bold flags aligned with `scores`.
///
/// The best method is the argmax of the mean; every method tied with it is
/// bold, and any other method is bold when a one-sided paired t-test does
/// not find it significantly worse than the best. With fewer than two
/// records no test is possible and only the tied best methods are bold.
pub fn bold_flags(scores: &[&[f64]], alpha: f64) -> Result<Vec<bool>> {
    if scores.is_empty() {
        return Err(Error::param("no methods to compare"));
    }
    let n = scores[0].len();
    if scores.iter().any(|s| s.len() != n) {
        return Err(Error::param("methods were scored on different record sets"));
    }
    let means: Vec<f64> = scores.iter().map(|s| mean(s)).collect();
    let best_mean = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best = means.iter().position(|&m| m == best_mean).unwrap_or(0);
    scores
        .iter()
        .zip(&means)
        .map(|(s, &m)| {
            if m == best_mean || n == 0 {
                return Ok(true);
            }
            if n < 2 {
                return Ok(false);
            }
            Ok(!paired_one_sided_t_test(s, scores[best], alpha)?.significant)
        })
        .collect()
}

/// Names of the methods that are not significantly worse than the best.
pub fn mark_best(methods: &[(&str, &[f64])], alpha: f64) -> Result<BTreeSet<String>> {
    let scores: Vec<&[f64]> = methods.iter().map(|(_, s)| *s).collect();
    let flags = bold_flags(&scores, alpha)?;
    Ok(methods
        .iter()
        .zip(flags)
        .filter(|(_, b)| *b)
        .map(|((name, _), _)| name.to_string())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::Baseline;
    use crate::synth;

    fn record(id: &str, input_iou: f64) -> EvalRecord {
        let s = Arc::new(BinaryShape::new(2, 2).unwrap());
        EvalRecord {
            item_id: id.into(),
            truth: s.clone(),
            noisy: s,
            input_iou,
            noise_kind: NoiseKind::SaltPepper,
        }
    }

    #[test]
    fn bin_boundaries() {
        let recs = vec![
            record("a", 0.95),
            record("b", 1.0),
            record("c", 0.6),
            record("d", 0.49),
            record("e", 0.5999),
        ];
        let bins = bin_by_input_iou(recs, &default_edges(), 1000, 0).unwrap();
        assert_eq!(bins.len(), 5);
        let ids = |i: usize| bins[i].records.iter().map(|r| r.item_id.as_str()).collect::<Vec<_>>();
        assert_eq!(ids(0), vec!["e"]);
        assert_eq!(ids(1), vec!["c"]);
        assert_eq!(ids(4), vec!["a", "b"]);
        let total: usize = bins.iter().map(|b| b.records.len()).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn downsampling_is_capped_and_seeded() {
        let recs: Vec<EvalRecord> = (0..2500)
            .map(|i| record(&format!("r{i}"), 0.7 + 0.1 * (i as f64 / 2500.0)))
            .collect();
        let a = bin_by_input_iou(recs.clone(), &default_edges(), 1000, 9).unwrap();
        let b = bin_by_input_iou(recs.clone(), &default_edges(), 1000, 9).unwrap();
        let c = bin_by_input_iou(recs, &default_edges(), 1000, 10).unwrap();
        let ids = |bins: &[EvalBin]| bins[2].records.iter().map(|r| r.item_id.clone()).collect::<Vec<_>>();
        assert_eq!(a[2].records.len(), 1000);
        assert_eq!(ids(&a), ids(&b));
        assert_ne!(ids(&a), ids(&c));
    }

    #[test]
    fn unsorted_edges_rejected() {
        assert!(matches!(
            bin_by_input_iou(vec![], &[0.5, 0.7, 0.6], 10, 0),
            Err(Error::UnsortedEdges)
        ));
    }

    #[test]
    fn edge_ranges() {
        assert_eq!(edges_from_range(0.5, 1.0, 0.1).unwrap(), default_edges());
        assert_eq!(
            edges_from_range(0.0, 1.0, 0.25).unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(edges_from_range(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn identity_and_oracle_methods() {
        let clean: Vec<Arc<BinaryShape>> = (0..6)
            .map(|i| Arc::new(synth::disk(32, 32, 16.0, 16.0, 8.0 + i as f64).unwrap()))
            .collect();
        let recs: Vec<EvalRecord> = clean
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let noisy = Arc::new(crate::noise::salt_pepper(c, 0.02 + 0.01 * i as f64, i as u64).unwrap());
                EvalRecord::new(format!("s{i}"), c.clone(), noisy, NoiseKind::SaltPepper).unwrap()
            })
            .collect();
        let bins = bin_by_input_iou(recs, &edges_from_range(0.0, 1.0, 0.5).unwrap(), 1000, 0).unwrap();
        let id = evaluate_method(&Baseline::identity(), &bins).unwrap();
        for (b, s) in bins.iter().zip(&id.bins) {
            let inputs: Vec<f64> = b.records.iter().map(|r| r.input_iou).collect();
            assert_eq!(s.ious(), inputs);
        }
        let oracle = score_bins("oracle", &bins, |_| Ok(Some(1.0))).unwrap();
        for s in oracle.bins.iter().filter(|s| s.n() > 0) {
            assert_eq!(s.mean_iou, 1.0);
        }
    }

    #[test]
    fn failures_score_zero_and_are_flagged() {
        let bins = bin_by_input_iou(
            vec![record("ok", 0.9), record("bad", 0.95), record("ok2", 0.97)],
            &default_edges(),
            10,
            0,
        )
        .unwrap();
        let s = score_bins(
            "m",
            &bins,
            |r| {
                if r.item_id == "bad" {
                    Ok(None)
                } else {
                    Ok(Some(0.9))
                }
            },
        )
        .unwrap();
        assert_eq!(s.bins[4].failed, vec!["bad".to_string()]);
        assert!((s.bins[4].mean_iou - 0.6).abs() < 1e-12);
        let abort = score_bins("m", &bins, |r| {
            if r.item_id == "bad" {
                Err(Error::param("boom"))
            } else {
                Ok(Some(0.9))
            }
        });
        assert!(abort.is_err());
    }

    #[test]
    fn arithmetic_mean() {
        assert!((mean(&[0.8, 0.9, 1.0]) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn bolding_rules() {
        let a = [0.9, 0.8, 0.85, 0.95];
        assert_eq!(mark_best(&[("a", &a)], 0.05).unwrap().len(), 1);
        let both = mark_best(&[("a", &a), ("b", &a)], 0.05).unwrap();
        assert_eq!(both.len(), 2);
        let worse = [0.5, 0.4, 0.45, 0.52];
        let set = mark_best(&[("a", &a), ("w", &worse)], 0.05).unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec!["a".to_string()]);
        assert!(mark_best(&[], 0.05).is_err());
    }
}
