use serde::{Deserialize, Serialize};

use super::qubo::QuboModel;
use super::OptError;

/// Largest instance [`TspInstance::exact_tour`] will enumerate.
pub const EXACT_TOUR_MAX_CITIES: usize = 10;

/// Complete weighted graph over `N` cities.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    labels: Vec<String>,
    weights: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightsFile {
    Bare(Vec<Vec<f64>>),
    Wrapped {
        weights: Vec<Vec<f64>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

impl TspInstance {
    /// Weights must be square, symmetric (to 1e-9), non-negative and zero on
    /// the diagonal.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self, OptError> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        TspInstance::with_labels(labels, weights)
    }

    pub fn with_labels(labels: Vec<String>, weights: Vec<Vec<f64>>) -> Result<Self, OptError> {
        let n = weights.len();
        let bad = |msg: String| Err(OptError::InvalidInstance(msg));
        if n == 0 {
            return bad("no cities".into());
        }
        if labels.len() != n {
            return bad(format!("{} labels for {n} cities", labels.len()));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return bad(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            for (j, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return bad(format!("weight ({i}, {j}) = {w} is not a non-negative number"));
                }
                if (w - weights[j][i]).abs() > 1e-9 {
                    return bad(format!("weights ({i}, {j}) and ({j}, {i}) differ"));
                }
            }
            if row[i] != 0.0 {
                return bad(format!("diagonal entry ({i}, {i}) must be zero"));
            }
        }
        Ok(TspInstance { labels, weights })
    }

    /// Euclidean distances between points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self, OptError> {
        let labels = (0..points.len()).map(|i| i.to_string()).collect();
        TspInstance::from_labeled_points(labels, points)
    }

    fn from_labeled_points(labels: Vec<String>, points: &[(f64, f64)]) -> Result<Self, OptError> {
        let weights = points
            .iter()
            .map(|a| {
                points
                    .iter()
                    .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                    .collect()
            })
            .collect();
        TspInstance::with_labels(labels, weights)
    }

    /// `city_id,x,y` rows; a header row is skipped when its coordinates do
    /// not parse.
    pub fn from_csv(text: &str) -> Result<Self, OptError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut labels = Vec::new();
        let mut points = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| OptError::InvalidInstance(e.to_string()))?;
            if record.len() != 3 {
                return Err(OptError::InvalidInstance(format!(
                    "row {} has {} fields, expected city_id,x,y",
                    row + 1,
                    record.len()
                )));
            }
            let coords = (record[1].parse::<f64>(), record[2].parse::<f64>());
            match coords {
                (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => {
                    labels.push(record[0].to_string());
                    points.push((x, y));
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(OptError::InvalidInstance(format!(
                        "row {} has non-numeric coordinates",
                        row + 1
                    )))
                }
            }
        }
        TspInstance::from_labeled_points(labels, &points)
    }

    /// A bare `[[..], ..]` matrix or `{"weights": [[..]], "labels": [..]}`.
    pub fn from_json(text: &str) -> Result<Self, OptError> {
        let file: WeightsFile =
            serde_json::from_str(text).map_err(|e| OptError::InvalidInstance(e.to_string()))?;
        match file {
            WeightsFile::Bare(w) => TspInstance::new(w),
            WeightsFile::Wrapped { weights, labels: None } => TspInstance::new(weights),
            WeightsFile::Wrapped {
                weights,
                labels: Some(labels),
            } => TspInstance::with_labels(labels, weights),
        }
    }

    pub fn num_cities(&self) -> usize {
        self.weights.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.weights[a][b]
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Length of the closed tour visiting `order` and returning to the start.
    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        (0..order.len())
            .map(|t| self.weights[order[t]][order[(t + 1) % order.len()]])
            .sum()
    }

    /// Optimal closed tour by enumerating orders that start at city 0.
    pub fn exact_tour(&self) -> Result<(Vec<usize>, f64), OptError> {
        let n = self.num_cities();
        if n > EXACT_TOUR_MAX_CITIES {
            return Err(OptError::TooLarge {
                n,
                max: EXACT_TOUR_MAX_CITIES,
            });
        }
        let mut rest: Vec<usize> = (1..n).collect();
        let mut best = (vec![0], f64::INFINITY);
        permute(&mut rest, 0, &mut |perm| {
            let mut order = Vec::with_capacity(n);
            order.push(0);
            order.extend_from_slice(perm);
            let cost = self.tour_cost(&order);
            if cost < best.1 - 1e-12 {
                best = (order, cost);
            }
        });
        if n == 1 {
            best.1 = 0.0;
        }
        Ok(best)
    }
}

/// Visit every permutation of `items[k..]` in place.
fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// `2 * N * max(w)`, or 1 when every weight is zero.
pub fn default_penalty(instance: &TspInstance) -> f64 {
    let p = 2.0 * instance.num_cities() as f64 * instance.max_weight();
    if p > 0.0 {
        p
    } else {
        1.0
    }
}

/// Maps QUBO bitstrings of a TSP encoding back to tours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TspDecoder {
    num_cities: usize,
}

impl TspDecoder {
    pub fn num_cities(&self) -> usize {
        self.num_cities
    }

    /// Variable index of "city `c` in time slot `t`".
    pub fn var(&self, city: usize, slot: usize) -> usize {
        city * self.num_cities + slot
    }

    /// City order by time slot, or `None` unless every city and every slot
    /// is used exactly once.
    pub fn decode(&self, bits: &[u8]) -> Option<Vec<usize>> {
        let n = self.num_cities;
        if bits.len() != n * n {
            return None;
        }
        let mut order = vec![usize::MAX; n];
        for c in 0..n {
            let slots: Vec<usize> = (0..n).filter(|&t| bits[self.var(c, t)] == 1).collect();
            let [t] = slots[..] else { return None };
            if order[t] != usize::MAX {
                return None;
            }
            order[t] = c;
        }
        Some(order)
    }

    /// Bitstring placing `order[t]` in slot `t`.
    pub fn encode(&self, order: &[usize]) -> Vec<u8> {
        let mut bits = vec![0; self.num_cities * self.num_cities];
        for (t, &c) in order.iter().enumerate() {
            bits[self.var(c, t)] = 1;
        }
        bits
    }
}

/// One-hot TSP encoding over `N^2` variables `x_{c,t}` (index `c*N + t`):
///
/// `A * sum_c (1 - sum_t x_{c,t})^2 + A * sum_t (1 - sum_c x_{c,t})^2
///  + sum_{c != c'} sum_t w_{c,c'} x_{c,t} x_{c',t+1 mod N}`.
///
/// The constant `2AN` from expanding the squares is kept in the model
/// offset, so a feasible bitstring's energy is exactly its tour length.
pub fn encode_tsp(instance: &TspInstance, penalty: f64) -> Result<(QuboModel, TspDecoder), OptError> {
    let n = instance.num_cities();
    if n < 3 {
        return Err(OptError::InvalidInstance(format!("need at least 3 cities, got {n}")));
    }
    if !(penalty > 0.0 && penalty.is_finite()) {
        return Err(OptError::BadPenalty(penalty));
    }
    let decoder = TspDecoder { num_cities: n };
    let mut model = QuboModel::new(n * n);

    // Each one-hot group g contributes A - A*sum x + 2A*sum_{pairs} x x.
    let mut one_hot = |group: &[usize]| -> Result<(), OptError> {
        for (k, &v) in group.iter().enumerate() {
            model.add(v, v, -penalty)?;
            for &u in &group[k + 1..] {
                model.add(v, u, 2.0 * penalty)?;
            }
        }
        Ok(())
    };
    for c in 0..n {
        let group: Vec<usize> = (0..n).map(|t| decoder.var(c, t)).collect();
        one_hot(&group)?;
    }
    for t in 0..n {
        let group: Vec<usize> = (0..n).map(|c| decoder.var(c, t)).collect();
        one_hot(&group)?;
    }
    for c in 0..n {
        for c2 in 0..n {
            if c == c2 {
                continue;
            }
            let w = instance.weight(c, c2);
            if w == 0.0 {
                continue;
            }
            for t in 0..n {
                model.add(decoder.var(c, t), decoder.var(c2, (t + 1) % n), w)?;
            }
        }
    }
    model.set_offset(2.0 * penalty * n as f64);
    Ok((model, decoder))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn unit_square() -> TspInstance {
        TspInstance::from_points(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap()
    }

    fn random_instance(n: usize, rng: &mut impl Rng) -> TspInstance {
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        TspInstance::from_points(&pts).unwrap()
    }

    #[test]
    fn sixteen_variables_for_four_cities() {
        let (model, _) = encode_tsp(&unit_square(), 10.0).unwrap();
        assert_eq!(model.n(), 16);
    }

    #[test]
    fn exact_tour_of_unit_square() {
        let (order, cost) = unit_square().exact_tour().unwrap();
        assert!((cost - 4.0).abs() < 1e-12);
        assert_eq!(order.len(), 4);
    }

    #[test]
    fn feasible_energy_equals_tour_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 3..=5 {
            let inst = random_instance(n, &mut rng);
            let (model, dec) = encode_tsp(&inst, default_penalty(&inst)).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            for _ in 0..20 {
                for i in (1..n).rev() {
                    order.swap(i, rng.gen_range(0..=i));
                }
                let bits = dec.encode(&order);
                assert_eq!(dec.decode(&bits), Some(order.clone()));
                let e = model.evaluate(&bits).unwrap();
                assert!((e - inst.tour_cost(&order)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn decoder_rejects_infeasible() {
        let dec = TspDecoder { num_cities: 3 };
        assert_eq!(dec.decode(&[0; 9]), None);
        // Two cities in slot 0.
        assert_eq!(dec.decode(&[1, 0, 0, 1, 0, 0, 0, 0, 1]), None);
        // City 0 in two slots.
        assert_eq!(dec.decode(&[1, 1, 0, 0, 0, 1, 0, 0, 0]), None);
        assert_eq!(dec.decode(&[1, 0, 0]), None);
        assert_eq!(dec.decode(&[0, 0, 1, 1, 0, 0, 0, 1, 0]), Some(vec![1, 2, 0]));
    }

    #[test]
    fn penalty_dominance_on_random_infeasible_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let inst = random_instance(4, &mut rng);
            let n = inst.num_cities() as f64;
            let penalty = 1.01 * n * n * inst.max_weight();
            let (model, dec) = encode_tsp(&inst, penalty).unwrap();
            let (_, best_cost) = inst.exact_tour().unwrap();
            let worst_feasible = {
                let mut worst: f64 = 0.0;
                let mut order: Vec<usize> = (0..4).collect();
                permute(&mut order, 0, &mut |o| worst = worst.max(inst.tour_cost(o)));
                worst
            };
            let mut checked = 0;
            while checked < 500 {
                let bits: Vec<u8> = (0..16).map(|_| u8::from(rng.gen_bool(0.3))).collect();
                if dec.decode(&bits).is_some() {
                    continue;
                }
                let e = model.evaluate(&bits).unwrap();
                assert!(e > worst_feasible);
                assert!(e >= best_cost + penalty);
                checked += 1;
            }
        }
    }

    #[test]
    fn validation() {
        assert!(TspInstance::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(TspInstance::new(vec![vec![1.0]]).is_err());
        assert!(TspInstance::new(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(TspInstance::new(vec![vec![0.0, 1.0]]).is_err());
        assert!(TspInstance::new(vec![]).is_err());
        let small = TspInstance::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(encode_tsp(&small, 1.0), Err(OptError::InvalidInstance(_))));
        assert_eq!(encode_tsp(&unit_square(), 0.0).unwrap_err(), OptError::BadPenalty(0.0));
        assert_eq!(encode_tsp(&unit_square(), -1.0).unwrap_err(), OptError::BadPenalty(-1.0));
        let big = TspInstance::from_points(&[(0.0, 0.0); 11]).unwrap();
        assert!(matches!(big.exact_tour(), Err(OptError::TooLarge { n: 11, max: 10 })));
    }

    #[test]
    fn file_formats() {
        let csv = "city_id,x,y\na,0,0\nb,0,1\nc,1,1\nd,1,0\n";
        let inst = TspInstance::from_csv(csv).unwrap();
        assert_eq!(inst.labels(), &["a", "b", "c", "d"]);
        assert_eq!(inst, TspInstance::with_labels(inst.labels().to_vec(), unit_square().weights.clone()).unwrap());
        assert_eq!(TspInstance::from_csv("0,0,0\n1,3,4\n").unwrap().weight(0, 1), 5.0);
        assert!(TspInstance::from_csv("a,0,0\nb,x,1\n").is_err());
        assert!(TspInstance::from_csv("a,0\n").is_err());

        let w = "[[0,1,2],[1,0,3],[2,3,0]]";
        assert_eq!(TspInstance::from_json(w).unwrap().weight(1, 2), 3.0);
        let wrapped = r#"{"weights": [[0,1,2],[1,0,3],[2,3,0]], "labels": ["x","y","z"]}"#;
        assert_eq!(TspInstance::from_json(wrapped).unwrap().labels()[2], "z");
        assert!(TspInstance::from_json("{}").is_err());
    }
}
