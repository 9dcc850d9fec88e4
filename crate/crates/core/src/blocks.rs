//! Load-solar multi-regional time-block partition.
//!
//! Hourly load and solar series are reduced to a handful of representative
//! steady-state blocks per year. Hours are clustered with k-means over
//! concatenated per-region (load, solar_cf) vectors, each dimension scaled
//! to [0, 1] by its yearly min/max. Block levels are cluster means, which
//! preserves energy totals exactly.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::PlanningCase;

#[derive(Debug, thiserror::Error)]
pub enum PartitionError {
    #[error("k_per_year must be >= 1")]
    ZeroK,
    #[error("empty hourly series for region {region}, year {year}")]
    EmptySeries { region: String, year: usize },
    #[error("missing hourly series for region {region}, year {year}")]
    MissingSeries { region: String, year: usize },
    #[error("schedule does not match case: {0}")]
    Mismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{file}:{row}: {message}")]
    Parse {
        file: String,
        row: usize,
        message: String,
    },
}

/// One representative operating condition of a year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBlock {
    /// 1-based planning year.
    pub year: usize,
    /// 0-based block index within the year.
    pub block: usize,
    /// Fraction of the year spent in this block; sums to 1 per year.
    pub duration_fraction: f64,
    /// Hour-weighted mean load per region, indexed like the case's regions.
    pub load_by_region: Vec<f64>,
    /// Hour-weighted mean PV capacity factor per region.
    pub pv_cf_by_region: Vec<f64>,
}

/// Blocks for every year plus the per-hour assignment that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    /// Region id order used by the per-region vectors.
    pub region_ids: Vec<String>,
    pub hours_per_year: usize,
    pub blocks: Vec<TimeBlock>,
    /// `assignment[y - 1][h]` is the block index of hour `h` in year `y`.
    pub assignment: Vec<Vec<usize>>,
}

impl BlockSchedule {
    pub fn n_years(&self) -> usize {
        self.assignment.len()
    }

    pub fn blocks_for_year(&self, year: usize) -> impl Iterator<Item = &TimeBlock> {
        self.blocks.iter().filter(move |b| b.year == year)
    }

    pub fn n_blocks(&self, year: usize) -> usize {
        self.blocks_for_year(year).count()
    }

    pub fn block(&self, year: usize, block: usize) -> Option<&TimeBlock> {
        self.blocks_for_year(year).find(|b| b.block == block)
    }
}

/// Per-year partition quality summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearPartitionReport {
    pub year: usize,
    pub duration_fraction_sum: f64,
    /// Max over regions of |block energy - hourly energy| / hourly energy.
    pub energy_rel_error: f64,
    /// Blocks whose PV capacity factor is zero in every region.
    pub zero_cf_blocks: usize,
    pub n_blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub years: Vec<YearPartitionReport>,
}

fn normalize(values: &[f64]) -> Vec<f64> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > min {
        values.iter().map(|v| (v - min) / (max - min)).collect()
    } else {
        vec![0.0; values.len()]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties break to the lowest index.
fn nearest(point: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Deterministic k-means: a seeded random first center, farthest-point
/// completion, Lloyd iterations capped at 100, assignment ties to the lowest
/// cluster index. Returns per-hour cluster labels (0..k_eff).
fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let mut distinct: Vec<usize> = Vec::new();
    'outer: for i in 0..n {
        for &j in &distinct {
            if sq_dist(&points[i], &points[j]) == 0.0 {
                continue 'outer;
            }
        }
        distinct.push(i);
    }
    let k_eff = k.min(distinct.len()).max(1);

    // Farthest-point initialization from a seeded start.
    let first = distinct[rng.gen_range(0..distinct.len())];
    let mut centers: Vec<Vec<f64>> = vec![points[first].clone()];
    while centers.len() < k_eff {
        let mut best = None;
        let mut best_d = -1.0;
        for i in 0..n {
            let d = centers
                .iter()
                .map(|c| sq_dist(&points[i], c))
                .fold(f64::INFINITY, f64::min);
            if d > best_d {
                best_d = d;
                best = Some(i);
            }
        }
        centers.push(points[best.expect("nonempty points")].clone());
    }

    let dim = points[0].len();
    let mut labels = vec![0usize; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let l = nearest(p, &centers);
            if l != labels[i] {
                labels[i] = l;
                changed = true;
            }
        }
        // Refill any emptied cluster with the point farthest from its center.
        loop {
            let mut counts = vec![0usize; centers.len()];
            for &l in &labels {
                counts[l] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let mut far = 0;
            let mut far_d = -1.0;
            for (i, p) in points.iter().enumerate() {
                if counts[labels[i]] <= 1 {
                    continue;
                }
                let d = sq_dist(p, &centers[labels[i]]);
                if d > far_d {
                    far_d = d;
                    far = i;
                }
            }
            labels[far] = empty;
            centers[empty] = points[far].clone();
            changed = true;
        }
        if !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            let mut mean = vec![0.0; dim];
            for m in &members {
                for (d, v) in m.iter().enumerate() {
                    mean[d] += v;
                }
            }
            for v in &mut mean {
                *v /= members.len() as f64;
            }
            *center = mean;
        }
    }
    labels
}

/// Partitions every year of `case` into at most `k_per_year` representative
/// blocks. Deterministic for a fixed seed; block indices are ordered by each
/// cluster's earliest assigned hour.
pub fn partition_blocks(
    case: &PlanningCase,
    k_per_year: usize,
    seed: u64,
) -> Result<BlockSchedule, PartitionError> {
    if k_per_year == 0 {
        return Err(PartitionError::ZeroK);
    }
    let hours = case.horizon.hours_per_year;
    let region_ids: Vec<String> = case.regions.iter().map(|r| r.id.clone()).collect();

    let mut blocks = Vec::new();
    let mut assignment = Vec::new();
    for year in 1..=case.horizon.n_years {
        // Per-region normalized load and cf dimensions.
        let mut dims: Vec<Vec<f64>> = Vec::new();
        let mut raw_loads: Vec<&[f64]> = Vec::new();
        let mut raw_cfs: Vec<&[f64]> = Vec::new();
        for rid in &region_ids {
            let series =
                case.series_for(rid, year)
                    .ok_or_else(|| PartitionError::MissingSeries {
                        region: rid.clone(),
                        year,
                    })?;
            if series.load_mw.is_empty() || series.solar_cf.is_empty() {
                return Err(PartitionError::EmptySeries {
                    region: rid.clone(),
                    year,
                });
            }
            dims.push(normalize(&series.load_mw));
            dims.push(normalize(&series.solar_cf));
            raw_loads.push(&series.load_mw);
            raw_cfs.push(&series.solar_cf);
        }
        let points: Vec<Vec<f64>> = (0..hours)
            .map(|h| dims.iter().map(|d| d[h]).collect())
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(year as u64));
        let labels = kmeans(&points, k_per_year, &mut rng);

        // Relabel clusters by earliest assigned hour for stable block indices.
        let mut order: Vec<usize> = Vec::new();
        for &l in &labels {
            if !order.contains(&l) {
                order.push(l);
            }
        }
        let relabel: Vec<usize> = {
            let mut map = vec![usize::MAX; order.len().max(labels.iter().max().unwrap() + 1)];
            for (new, &old) in order.iter().enumerate() {
                map[old] = new;
            }
            map
        };
        let year_labels: Vec<usize> = labels.iter().map(|&l| relabel[l]).collect();
        let n_blocks = order.len();

        for b in 0..n_blocks {
            let members: Vec<usize> = (0..hours).filter(|&h| year_labels[h] == b).collect();
            let nf = members.len() as f64;
            let load_by_region: Vec<f64> = raw_loads
                .iter()
                .map(|l| members.iter().map(|&h| l[h]).sum::<f64>() / nf)
                .collect();
            let pv_cf_by_region: Vec<f64> = raw_cfs
                .iter()
                .map(|c| members.iter().map(|&h| c[h]).sum::<f64>() / nf)
                .collect();
            blocks.push(TimeBlock {
                year,
                block: b,
                duration_fraction: nf / hours as f64,
                load_by_region,
                pv_cf_by_region,
            });
        }
        assignment.push(year_labels);
    }

    Ok(BlockSchedule {
        region_ids,
        hours_per_year: hours,
        blocks,
        assignment,
    })
}

/// Checks duration-fraction closure, energy conservation, and zero-CF block
/// counts of a schedule against the case it was produced from.
pub fn partition_report(
    sched: &BlockSchedule,
    case: &PlanningCase,
) -> Result<PartitionReport, PartitionError> {
    let expected: Vec<String> = case.regions.iter().map(|r| r.id.clone()).collect();
    if sched.region_ids != expected {
        return Err(PartitionError::Mismatch(format!(
            "schedule regions {:?} != case regions {:?}",
            sched.region_ids, expected
        )));
    }
    if sched.hours_per_year != case.horizon.hours_per_year
        || sched.n_years() != case.horizon.n_years
    {
        return Err(PartitionError::Mismatch(
            "horizon differs between schedule and case".into(),
        ));
    }

    let hours = case.horizon.hours_per_year as f64;
    let mut years = Vec::new();
    for year in 1..=case.horizon.n_years {
        let blocks: Vec<&TimeBlock> = sched.blocks_for_year(year).collect();
        let df_sum: f64 = blocks.iter().map(|b| b.duration_fraction).sum();
        let mut energy_rel_error: f64 = 0.0;
        for (ri, rid) in sched.region_ids.iter().enumerate() {
            let series = case
                .series_for(rid, year)
                .ok_or_else(|| PartitionError::MissingSeries {
                    region: rid.clone(),
                    year,
                })?;
            let hourly: f64 = series.load_mw.iter().sum();
            let blocked: f64 = blocks
                .iter()
                .map(|b| b.duration_fraction * b.load_by_region[ri] * hours)
                .sum();
            let denom = hourly.abs().max(1.0);
            energy_rel_error = energy_rel_error.max((blocked - hourly).abs() / denom);
        }
        let zero_cf_blocks = blocks
            .iter()
            .filter(|b| b.pv_cf_by_region.iter().all(|&c| c == 0.0))
            .count();
        years.push(YearPartitionReport {
            year,
            duration_fraction_sum: df_sum,
            energy_rel_error,
            zero_cf_blocks,
            n_blocks: blocks.len(),
        });
    }
    Ok(PartitionReport { years })
}

// ---------------------------------------------------------------------------
// Serialization: blocks.csv + assignment.csv
// ---------------------------------------------------------------------------

pub fn write_block_schedule(sched: &BlockSchedule, dir: &Path) -> Result<(), PartitionError> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("blocks.csv"))?;
    let mut header = vec!["year".to_string(), "block".into(), "duration_fraction".into()];
    for rid in &sched.region_ids {
        header.push(format!("load_{rid}"));
    }
    for rid in &sched.region_ids {
        header.push(format!("cf_{rid}"));
    }
    w.write_record(&header)?;
    for b in &sched.blocks {
        let mut rec = vec![
            b.year.to_string(),
            b.block.to_string(),
            b.duration_fraction.to_string(),
        ];
        rec.extend(b.load_by_region.iter().map(|v| v.to_string()));
        rec.extend(b.pv_cf_by_region.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(PartitionError::Io)?;

    let mut w = csv::Writer::from_path(dir.join("assignment.csv"))?;
    w.write_record(["year", "hour", "block"])?;
    for (y, hours) in sched.assignment.iter().enumerate() {
        for (h, b) in hours.iter().enumerate() {
            w.write_record([(y + 1).to_string(), h.to_string(), b.to_string()])?;
        }
    }
    w.flush().map_err(PartitionError::Io)?;
    Ok(())
}

pub fn read_block_schedule(dir: &Path) -> Result<BlockSchedule, PartitionError> {
    let blocks_path = dir.join("blocks.csv");
    let mut reader = csv::Reader::from_path(&blocks_path)?;
    let headers = reader.headers()?.clone();
    let region_ids: Vec<String> = headers
        .iter()
        .filter_map(|h| h.strip_prefix("load_"))
        .map(String::from)
        .collect();
    let parse = |file: &Path, row: usize, raw: &str| -> Result<f64, PartitionError> {
        raw.trim().parse().map_err(|_| PartitionError::Parse {
            file: file.display().to_string(),
            row,
            message: format!("unparseable number \"{raw}\""),
        })
    };
    let mut blocks = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let get = |name: &str| -> &str {
            headers
                .iter()
                .position(|h| h == name)
                .and_then(|idx| record.get(idx))
                .unwrap_or("")
        };
        let mut load_by_region = Vec::new();
        let mut pv_cf_by_region = Vec::new();
        for rid in &region_ids {
            load_by_region.push(parse(&blocks_path, row, get(&format!("load_{rid}")))?);
            pv_cf_by_region.push(parse(&blocks_path, row, get(&format!("cf_{rid}")))?);
        }
        blocks.push(TimeBlock {
            year: parse(&blocks_path, row, get("year"))? as usize,
            block: parse(&blocks_path, row, get("block"))? as usize,
            duration_fraction: parse(&blocks_path, row, get("duration_fraction"))?,
            load_by_region,
            pv_cf_by_region,
        });
    }

    let assign_path = dir.join("assignment.csv");
    let mut reader = csv::Reader::from_path(&assign_path)?;
    let mut assignment: Vec<Vec<usize>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let year = parse(&assign_path, row, record.get(0).unwrap_or(""))? as usize;
        let hour = parse(&assign_path, row, record.get(1).unwrap_or(""))? as usize;
        let block = parse(&assign_path, row, record.get(2).unwrap_or(""))? as usize;
        while assignment.len() < year {
            assignment.push(Vec::new());
        }
        let hours = &mut assignment[year - 1];
        while hours.len() <= hour {
            hours.push(0);
        }
        hours[hour] = block;
    }
    let hours_per_year = assignment.first().map(|v| v.len()).unwrap_or(0);
    Ok(BlockSchedule {
        region_ids,
        hours_per_year,
        blocks,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{HourlySeries, PlanningCase, PlanningHorizon, Region};

    fn case_with_series(load: Vec<f64>, cf: Vec<f64>) -> PlanningCase {
        let hours = load.len();
        PlanningCase {
            horizon: PlanningHorizon {
                n_years: 1,
                discount_rate: 0.05,
                hours_per_year: hours,
            },
            regions: vec![Region {
                id: "a".into(),
                name: "A".into(),
                pv_build_cost_by_year: vec![0.0],
                land_cost_by_year: vec![0.0],
                pv_build_limit_by_year: vec![0.0],
                voll: 9000.0,
                reserve_margin_by_year: vec![0.0],
                rps_by_year: vec![0.0],
                maintenance_factor: 0.5,
                validated_dispatch_total: 0.0,
            }],
            units: vec![],
            interfaces: vec![],
            series: vec![HourlySeries {
                region: "a".into(),
                year: 1,
                load_mw: load,
                solar_cf: cf,
            }],
        }
    }

    #[test]
    fn constant_series_single_block() {
        let case = case_with_series(vec![100.0; 24], vec![0.2; 24]);
        let sched = partition_blocks(&case, 1, 0).unwrap();
        assert_eq!(sched.blocks.len(), 1);
        let b = &sched.blocks[0];
        assert_eq!(b.duration_fraction, 1.0);
        assert!((b.load_by_region[0] - 100.0).abs() < 1e-12);
        assert!((b.pv_cf_by_region[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn night_day_split_is_exact() {
        // 12 night hours (cf 0, load 50) and 12 day hours (cf 0.8, load 100):
        // two separated point clouds that any 2-means assignment must split.
        let mut load = vec![50.0; 12];
        load.extend(vec![100.0; 12]);
        let mut cf = vec![0.0; 12];
        cf.extend(vec![0.8; 12]);
        let case = case_with_series(load.clone(), cf.clone());
        let sched = partition_blocks(&case, 2, 42).unwrap();
        assert_eq!(sched.blocks.len(), 2);

        // Brute-force oracle: optimal assignment groups identical points.
        for b in &sched.blocks {
            assert!((b.duration_fraction - 0.5).abs() < 1e-12);
        }
        let night = sched
            .blocks
            .iter()
            .find(|b| b.pv_cf_by_region[0] == 0.0)
            .expect("one block has zero cf");
        assert!((night.load_by_region[0] - 50.0).abs() < 1e-12);
        let day = sched
            .blocks
            .iter()
            .find(|b| b.pv_cf_by_region[0] > 0.0)
            .unwrap();
        assert!((day.load_by_region[0] - 100.0).abs() < 1e-12);
        assert!((day.pv_cf_by_region[0] - 0.8).abs() < 1e-12);

        // All night hours share one block, all day hours the other.
        let labels = &sched.assignment[0];
        assert!(labels[..12].iter().all(|&l| l == labels[0]));
        assert!(labels[12..].iter().all(|&l| l == labels[12]));
        assert_ne!(labels[0], labels[12]);
    }

    #[test]
    fn k1_levels_equal_plain_means() {
        let load: Vec<f64> = (0..24).map(|h| 50.0 + 3.0 * h as f64).collect();
        let cf: Vec<f64> = (0..24).map(|h| (h as f64 / 48.0).min(1.0)).collect();
        let mean_load = load.iter().sum::<f64>() / 24.0;
        let mean_cf = cf.iter().sum::<f64>() / 24.0;
        let case = case_with_series(load, cf);
        let sched = partition_blocks(&case, 1, 5).unwrap();
        assert_eq!(sched.blocks.len(), 1);
        assert!((sched.blocks[0].load_by_region[0] - mean_load).abs() < 1e-12);
        assert!((sched.blocks[0].pv_cf_by_region[0] - mean_cf).abs() < 1e-12);

        let report = partition_report(&sched, &case).unwrap();
        assert_eq!(report.years[0].energy_rel_error, 0.0);
    }

    #[test]
    fn zero_k_is_an_error() {
        let case = case_with_series(vec![1.0; 4], vec![0.0; 4]);
        assert!(matches!(partition_blocks(&case, 0, 0), Err(PartitionError::ZeroK)));
    }

    #[test]
    fn determinism_for_fixed_seed() {
        let load: Vec<f64> = (0..48).map(|h| 80.0 + 40.0 * ((h % 24) as f64 / 23.0)).collect();
        let cf: Vec<f64> = (0..48)
            .map(|h| if h % 24 >= 8 && h % 24 <= 16 { 0.7 } else { 0.0 })
            .collect();
        let case = case_with_series(load, cf);
        let a = partition_blocks(&case, 4, 9).unwrap();
        let b = partition_blocks(&case, 4, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wcss_non_increasing_in_k() {
        let load: Vec<f64> = (0..48)
            .map(|h| 100.0 + 30.0 * ((h as f64) * 0.7).sin().abs() + (h % 5) as f64)
            .collect();
        let cf: Vec<f64> = (0..48)
            .map(|h| if h % 24 >= 7 && h % 24 <= 17 { 0.1 + 0.05 * (h % 7) as f64 } else { 0.0 })
            .collect();
        let case = case_with_series(load.clone(), cf.clone());
        let wcss = |sched: &BlockSchedule| -> f64 {
            let labels = &sched.assignment[0];
            sched
                .blocks
                .iter()
                .map(|b| {
                    labels
                        .iter()
                        .enumerate()
                        .filter(|(_, &l)| l == b.block)
                        .map(|(h, _)| {
                            (load[h] - b.load_by_region[0]).powi(2)
                                + (cf[h] - b.pv_cf_by_region[0]).powi(2)
                        })
                        .sum::<f64>()
                })
                .sum()
        };
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let sched = partition_blocks(&case, k, 3).unwrap();
            let w = wcss(&sched);
            assert!(
                w <= prev + 1e-9,
                "wcss increased at k={k}: {w} > {prev}"
            );
            prev = w;
        }
    }

    #[test]
    fn roundtrip_through_csv() {
        let load: Vec<f64> = (0..24).map(|h| 50.0 + h as f64).collect();
        let cf: Vec<f64> = (0..24).map(|h| if h >= 8 && h <= 16 { 0.5 } else { 0.0 }).collect();
        let case = case_with_series(load, cf);
        let sched = partition_blocks(&case, 3, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_block_schedule(&sched, dir.path()).unwrap();
        let back = read_block_schedule(dir.path()).unwrap();
        assert_eq!(sched, back);
    }
}
