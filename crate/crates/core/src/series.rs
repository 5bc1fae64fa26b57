//! Hourly time-series data model and dataset splitting.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

/// Errors raised while constructing or slicing series and datasets.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("time series must contain at least one value")]
    Empty,
    #[error("step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("series `{name}` is not aligned with the dataset ({reason})")]
    Misaligned { name: String, reason: &'static str },
    #[error("series `{name}` has a negative value at index {index}")]
    Negative { name: String, index: usize },
    #[error("empty range {0:?}")]
    EmptyRange(Range<usize>),
    #[error("range {range:?} exceeds dataset length {len}")]
    OutOfRange { range: Range<usize>, len: usize },
    #[error("ranges {0:?} and {1:?} overlap or are out of order")]
    Overlap(Range<usize>, Range<usize>),
    #[error("dataset has no buildings")]
    NoBuildings,
    #[error("unknown building {0}")]
    UnknownBuilding(BuildingId),
}

/// Identifier of a building within a scenario. Ordering follows the numeric id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BuildingId(pub u32);

impl fmt::Display for BuildingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Regularly sampled series anchored at a UTC hour.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Whole hours since 1970-01-01T00:00Z of the first sample.
    start_hour: i64,
    step_hours: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start_hour: i64, step_hours: f64, values: Vec<f64>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if !(step_hours.is_finite() && step_hours > 0.0) {
            return Err(SeriesError::BadStep(step_hours));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite(i));
        }
        Ok(Self {
            start_hour,
            step_hours,
            values,
        })
    }

    /// Hourly series starting at `start_hour`.
    pub fn hourly(start_hour: i64, values: Vec<f64>) -> Result<Self, SeriesError> {
        Self::new(start_hour, 1.0, values)
    }

    pub fn start_hour(&self) -> i64 {
        self.start_hour
    }

    pub fn step_hours(&self) -> f64 {
        self.step_hours
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Hour-of-day (0..24) of sample `index`, for hourly series.
    pub fn hour_of_day(&self, index: usize) -> u32 {
        (self.start_hour + index as i64).rem_euclid(24) as u32
    }

    /// Sub-series covering `range`. The range must be non-empty and in bounds.
    pub fn slice(&self, range: Range<usize>) -> Result<Self, SeriesError> {
        check_range(&range, self.len())?;
        let offset = (range.start as f64 * self.step_hours) as i64;
        Ok(Self {
            start_hour: self.start_hour + offset,
            step_hours: self.step_hours,
            values: self.values[range].to_vec(),
        })
    }

    /// Appends `other`, which must continue this series on the same grid.
    pub fn concat(&self, other: &Self) -> Result<Self, SeriesError> {
        let expected = self.start_hour + (self.len() as f64 * self.step_hours) as i64;
        if other.step_hours != self.step_hours || other.start_hour != expected {
            return Err(SeriesError::Misaligned {
                name: String::from("concat"),
                reason: "second series does not continue the first",
            });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self {
            start_hour: self.start_hour,
            step_hours: self.step_hours,
            values,
        })
    }

    pub fn mean(&self) -> f64 {
        crate::stats::mean(&self.values)
    }
}

fn check_range(range: &Range<usize>, len: usize) -> Result<(), SeriesError> {
    if range.start >= range.end {
        return Err(SeriesError::EmptyRange(range.clone()));
    }
    if range.end > len {
        return Err(SeriesError::OutOfRange {
            range: range.clone(),
            len,
        });
    }
    Ok(())
}

/// One forecastable operational variable of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    Load(BuildingId),
    Solar,
    Price,
    Carbon,
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::Load(b) => write!(f, "load_{b}"),
            Variable::Solar => f.write_str("solar"),
            Variable::Price => f.write_str("price"),
            Variable::Carbon => f.write_str("carbon"),
        }
    }
}

/// Aligned hourly scenario: per-building loads plus the shared solar, price,
/// carbon and covariate series.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDataset {
    buildings: BTreeMap<BuildingId, TimeSeries>,
    solar: TimeSeries,
    price: TimeSeries,
    carbon: TimeSeries,
    covariates: BTreeMap<String, TimeSeries>,
}

impl ScenarioDataset {
    pub fn new(
        buildings: BTreeMap<BuildingId, TimeSeries>,
        solar: TimeSeries,
        price: TimeSeries,
        carbon: TimeSeries,
        covariates: BTreeMap<String, TimeSeries>,
    ) -> Result<Self, SeriesError> {
        if buildings.is_empty() {
            return Err(SeriesError::NoBuildings);
        }
        let reference = solar.clone();
        let aligned = |name: String, s: &TimeSeries| -> Result<(), SeriesError> {
            let reason = if s.start_hour != reference.start_hour {
                "start"
            } else if s.step_hours != reference.step_hours {
                "step"
            } else if s.len() != reference.len() {
                "length"
            } else {
                return Ok(());
            };
            Err(SeriesError::Misaligned { name, reason })
        };
        let nonnegative = |name: String, s: &TimeSeries| -> Result<(), SeriesError> {
            match s.values.iter().position(|v| *v < 0.0) {
                Some(index) => Err(SeriesError::Negative { name, index }),
                None => Ok(()),
            }
        };
        for (id, s) in &buildings {
            aligned(alloc::format!("load_{id}"), s)?;
            nonnegative(alloc::format!("load_{id}"), s)?;
        }
        nonnegative(String::from("solar"), &solar)?;
        aligned(String::from("price"), &price)?;
        aligned(String::from("carbon"), &carbon)?;
        nonnegative(String::from("carbon"), &carbon)?;
        for (name, s) in &covariates {
            aligned(name.clone(), s)?;
        }
        Ok(Self {
            buildings,
            solar,
            price,
            carbon,
            covariates,
        })
    }

    /// Hourly dataset starting at hour 0 with buildings numbered from 0 and
    /// no covariates.
    pub fn from_vecs(
        loads: Vec<Vec<f64>>,
        solar: Vec<f64>,
        price: Vec<f64>,
        carbon: Vec<f64>,
    ) -> Result<Self, SeriesError> {
        let buildings = loads
            .into_iter()
            .enumerate()
            .map(|(i, v)| Ok((BuildingId(i as u32), TimeSeries::hourly(0, v)?)))
            .collect::<Result<_, SeriesError>>()?;
        Self::new(
            buildings,
            TimeSeries::hourly(0, solar)?,
            TimeSeries::hourly(0, price)?,
            TimeSeries::hourly(0, carbon)?,
            BTreeMap::new(),
        )
    }

    pub fn len(&self) -> usize {
        self.solar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solar.is_empty()
    }

    pub fn start_hour(&self) -> i64 {
        self.solar.start_hour
    }

    pub fn step_hours(&self) -> f64 {
        self.solar.step_hours
    }

    pub fn buildings(&self) -> &BTreeMap<BuildingId, TimeSeries> {
        &self.buildings
    }

    pub fn building_ids(&self) -> impl Iterator<Item = BuildingId> + '_ {
        self.buildings.keys().copied()
    }

    pub fn load(&self, id: BuildingId) -> Result<&TimeSeries, SeriesError> {
        self.buildings
            .get(&id)
            .ok_or(SeriesError::UnknownBuilding(id))
    }

    pub fn solar(&self) -> &TimeSeries {
        &self.solar
    }

    pub fn price(&self) -> &TimeSeries {
        &self.price
    }

    pub fn carbon(&self) -> &TimeSeries {
        &self.carbon
    }

    pub fn covariates(&self) -> &BTreeMap<String, TimeSeries> {
        &self.covariates
    }

    /// Series backing `variable`.
    pub fn variable(&self, variable: Variable) -> Result<&TimeSeries, SeriesError> {
        match variable {
            Variable::Load(id) => self.load(id),
            Variable::Solar => Ok(&self.solar),
            Variable::Price => Ok(&self.price),
            Variable::Carbon => Ok(&self.carbon),
        }
    }

    /// All forecast variables: loads in building order, then solar, price, carbon.
    pub fn variables(&self) -> Vec<Variable> {
        let mut v: Vec<Variable> = self.building_ids().map(Variable::Load).collect();
        v.extend([Variable::Solar, Variable::Price, Variable::Carbon]);
        v
    }

    /// Every series (variables, then covariates) keyed by display name.
    pub fn named_series(&self) -> Vec<(String, &TimeSeries)> {
        let mut out = Vec::new();
        for v in self.variables() {
            out.push((
                alloc::format!("{v}"),
                self.variable(v).expect("own variable"),
            ));
        }
        for (name, s) in &self.covariates {
            out.push((name.clone(), s));
        }
        out
    }

    /// Slices every series identically.
    pub fn slice(&self, range: Range<usize>) -> Result<Self, SeriesError> {
        check_range(&range, self.len())?;
        let buildings = self
            .buildings
            .iter()
            .map(|(id, s)| Ok((*id, s.slice(range.clone())?)))
            .collect::<Result<_, SeriesError>>()?;
        let covariates = self
            .covariates
            .iter()
            .map(|(n, s)| Ok((n.clone(), s.slice(range.clone())?)))
            .collect::<Result<_, SeriesError>>()?;
        Ok(Self {
            buildings,
            solar: self.solar.slice(range.clone())?,
            price: self.price.slice(range.clone())?,
            carbon: self.carbon.slice(range.clone())?,
            covariates,
        })
    }

    /// Appends a dataset that continues this one on the same grid with the
    /// same set of series.
    pub fn concat(&self, other: &Self) -> Result<Self, SeriesError> {
        let keys_match = self.buildings.keys().eq(other.buildings.keys())
            && self.covariates.keys().eq(other.covariates.keys());
        if !keys_match {
            return Err(SeriesError::Misaligned {
                name: String::from("concat"),
                reason: "series names differ",
            });
        }
        let buildings = self
            .buildings
            .iter()
            .map(|(id, s)| Ok((*id, s.concat(&other.buildings[id])?)))
            .collect::<Result<_, SeriesError>>()?;
        let covariates = self
            .covariates
            .iter()
            .map(|(n, s)| Ok((n.clone(), s.concat(&other.covariates[n])?)))
            .collect::<Result<_, SeriesError>>()?;
        Ok(Self {
            buildings,
            solar: self.solar.concat(&other.solar)?,
            price: self.price.concat(&other.price)?,
            carbon: self.carbon.concat(&other.carbon)?,
            covariates,
        })
    }

    /// Replaces the load series of one building (used to build clone and
    /// regime-shift scenarios).
    pub fn with_load(mut self, id: BuildingId, load: TimeSeries) -> Result<Self, SeriesError> {
        self.buildings.insert(id, load);
        Self::new(
            self.buildings,
            self.solar,
            self.price,
            self.carbon,
            self.covariates,
        )
    }

    /// Replaces or adds a covariate series.
    pub fn with_covariate(mut self, name: String, series: TimeSeries) -> Result<Self, SeriesError> {
        self.covariates.insert(name, series);
        Self::new(
            self.buildings,
            self.solar,
            self.price,
            self.carbon,
            self.covariates,
        )
    }

    /// Keeps only the listed buildings.
    pub fn retain_buildings(mut self, keep: &[BuildingId]) -> Result<Self, SeriesError> {
        self.buildings.retain(|id, _| keep.contains(id));
        Self::new(
            self.buildings,
            self.solar,
            self.price,
            self.carbon,
            self.covariates,
        )
    }
}

/// Train / validate / test index ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub train: Range<usize>,
    pub validate: Range<usize>,
    pub test: Range<usize>,
}

impl SplitSpec {
    pub fn check(&self, len: usize) -> Result<(), SeriesError> {
        for r in [&self.train, &self.validate, &self.test] {
            check_range(r, len)?;
        }
        if self.train.end > self.validate.start {
            return Err(SeriesError::Overlap(
                self.train.clone(),
                self.validate.clone(),
            ));
        }
        if self.validate.end > self.test.start {
            return Err(SeriesError::Overlap(
                self.validate.clone(),
                self.test.clone(),
            ));
        }
        Ok(())
    }
}

/// Splits `ds` into (train, validate, test).
pub fn split_dataset(
    ds: &ScenarioDataset,
    spec: &SplitSpec,
) -> Result<(ScenarioDataset, ScenarioDataset, ScenarioDataset), SeriesError> {
    spec.check(ds.len())?;
    Ok((
        ds.slice(spec.train.clone())?,
        ds.slice(spec.validate.clone())?,
        ds.slice(spec.test.clone())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tiny(len: usize) -> ScenarioDataset {
        let s = |f: fn(usize) -> f64| TimeSeries::hourly(0, (0..len).map(f).collect()).unwrap();
        let mut b = BTreeMap::new();
        b.insert(BuildingId(0), s(|i| 10.0 + i as f64));
        ScenarioDataset::new(
            b,
            s(|_| 0.5),
            s(|i| i as f64 - 3.0),
            s(|_| 0.2),
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn series_rejects_bad_input() {
        assert_eq!(TimeSeries::hourly(0, vec![]), Err(SeriesError::Empty));
        assert_eq!(
            TimeSeries::new(0, 0.0, vec![1.0]),
            Err(SeriesError::BadStep(0.0))
        );
        assert_eq!(
            TimeSeries::hourly(0, vec![1.0, f64::NAN]),
            Err(SeriesError::NonFinite(1))
        );
    }

    #[test]
    fn split_lengths() {
        let ds = tiny(100);
        let spec = SplitSpec {
            train: 0..60,
            validate: 60..80,
            test: 80..100,
        };
        let (a, b, c) = split_dataset(&ds, &spec).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (60, 20, 20));
        assert_eq!(c.start_hour(), 80);
        assert_eq!(c.load(BuildingId(0)).unwrap().values()[0], 90.0);
    }

    #[test]
    fn split_rejects_overlap_and_empty() {
        let ds = tiny(100);
        let overlap = SplitSpec {
            train: 0..61,
            validate: 60..80,
            test: 80..100,
        };
        assert!(matches!(
            split_dataset(&ds, &overlap),
            Err(SeriesError::Overlap(..))
        ));
        let empty = SplitSpec {
            train: 0..100,
            validate: 100..100,
            test: 100..100,
        };
        assert!(matches!(
            split_dataset(&ds, &empty),
            Err(SeriesError::EmptyRange(_))
        ));
        let oob = SplitSpec {
            train: 0..10,
            validate: 10..20,
            test: 20..101,
        };
        assert!(matches!(
            split_dataset(&ds, &oob),
            Err(SeriesError::OutOfRange { .. })
        ));
    }

    #[test]
    fn negative_price_allowed_negative_load_rejected() {
        let ds = tiny(10);
        assert!(ds.price().values()[0] < 0.0);
        let bad = TimeSeries::hourly(0, vec![-1.0; 10]).unwrap();
        assert!(matches!(
            ds.with_load(BuildingId(1), bad),
            Err(SeriesError::Negative { .. })
        ));
    }

    #[test]
    fn misaligned_series_rejected() {
        let ds = tiny(10);
        let short = TimeSeries::hourly(0, vec![1.0; 9]).unwrap();
        assert!(matches!(
            ds.with_covariate(String::from("t"), short),
            Err(SeriesError::Misaligned {
                reason: "length",
                ..
            })
        ));
    }
}
