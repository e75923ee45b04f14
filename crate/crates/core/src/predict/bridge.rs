use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{PredictRequest, Prediction, Predictor, TrainLabels};
use crate::data::TaskKind;
use crate::error::{Error, Result};
use crate::io::format_number;

pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const META_FILE: &str = "meta.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const READY: &str = "READY";
pub const DONE: &str = "DONE";
pub const ERROR: &str = "ERROR";
pub const TARGET_COLUMN: &str = "__target__";

/// Request descriptor written next to the tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeMeta {
    pub task: TaskKind,
    pub n_classes: usize,
    pub request_id: String,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
}

/// Input sizes the backbone accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeLimits {
    pub max_classes: usize,
    pub max_train: usize,
}

impl Default for BridgeLimits {
    fn default() -> Self {
        BridgeLimits {
            max_classes: 10,
            max_train: 10_000,
        }
    }
}

impl BridgeLimits {
    pub fn check(&self, req: &PredictRequest) -> Result<()> {
        if req.task.is_classification() && req.n_classes > self.max_classes {
            return Err(Error::LimitViolation(format!(
                "{} classes exceed the cap of {}",
                req.n_classes, self.max_classes
            )));
        }
        if req.n_train() > self.max_train {
            return Err(Error::LimitViolation(format!(
                "{} training rows exceed the cap of {}",
                req.n_train(),
                self.max_train
            )));
        }
        Ok(())
    }
}

/// Client side of the file-based bridge to an external in-context backbone.
///
/// Each request gets its own directory under `endpoint` holding
/// `train.csv` (features `x0..` then `__target__`), `test.csv`,
/// `meta.json` and finally an empty `READY` file. The bridge answers with
/// `predictions.csv` followed by `DONE`, or with an `ERROR` file carrying a
/// message.
#[derive(Debug, Clone)]
pub struct BridgeClient {
    pub endpoint: PathBuf,
    pub timeout: Duration,
    pub limits: BridgeLimits,
    pub poll_min: Duration,
    pub poll_max: Duration,
}

static REQUEST_COUNTER: AtomicU64 = AtomicU64::new(0);

impl BridgeClient {
    pub fn new(endpoint: impl Into<PathBuf>, timeout: Duration) -> Self {
        BridgeClient {
            endpoint: endpoint.into(),
            timeout,
            limits: BridgeLimits::default(),
            poll_min: Duration::from_millis(5),
            poll_max: Duration::from_millis(250),
        }
    }

    fn new_request_id() -> String {
        let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
        let k = REQUEST_COUNTER.fetch_add(1, Ordering::Relaxed);
        format!("req-{}-{nanos}-{k}", std::process::id())
    }

    /// Writes a request directory and returns its path. `READY` is created last.
    pub fn submit(&self, req: &PredictRequest) -> Result<PathBuf> {
        req.validate()?;
        self.limits.check(req)?;
        let id = Self::new_request_id();
        let dir = self.endpoint.join(&id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let d = req.train_x.ncols();
        let header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();

        let path = dir.join(TRAIN_FILE);
        let mut w = csv::Writer::from_path(&path).map_err(|e| bridge_io(&path, e))?;
        let mut train_header = header.clone();
        train_header.push(TARGET_COLUMN.to_owned());
        w.write_record(&train_header).map_err(|e| bridge_io(&path, e))?;
        for (i, row) in req.train_x.rows().into_iter().enumerate() {
            let target = match &req.train_y {
                TrainLabels::Classes(c) => c[i].to_string(),
                TrainLabels::Values(v) => format_number(v[i]),
            };
            let rec = row.iter().map(|v| format_number(*v)).chain(std::iter::once(target));
            w.write_record(rec).map_err(|e| bridge_io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let path = dir.join(TEST_FILE);
        let mut w = csv::Writer::from_path(&path).map_err(|e| bridge_io(&path, e))?;
        w.write_record(&header).map_err(|e| bridge_io(&path, e))?;
        for row in req.test_x.rows() {
            w.write_record(row.iter().map(|v| format_number(*v)))
                .map_err(|e| bridge_io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let meta = BridgeMeta {
            task: req.task,
            n_classes: if req.task.is_classification() { req.n_classes } else { 0 },
            request_id: id,
            n_train: req.n_train(),
            n_test: req.n_test(),
            n_features: d,
        };
        crate::io::write_json(&dir.join(META_FILE), &meta)?;
        let ready = dir.join(READY);
        fs::write(&ready, b"").map_err(|e| Error::io(&ready, e))?;
        Ok(dir)
    }

    /// Polls `dir` with exponential backoff until `DONE` or `ERROR` appears.
    pub fn wait(&self, dir: &Path, req: &PredictRequest) -> Result<Prediction> {
        let start = Instant::now();
        let mut delay = self.poll_min;
        loop {
            if dir.join(ERROR).exists() {
                let msg = fs::read_to_string(dir.join(ERROR)).unwrap_or_default();
                return Err(Error::Bridge(format!("backbone reported: {}", msg.trim())));
            }
            if dir.join(DONE).exists() {
                return read_predictions(&dir.join(PREDICTIONS_FILE), req);
            }
            let elapsed = start.elapsed();
            if elapsed >= self.timeout {
                return Err(Error::BridgeTimeout(self.timeout));
            }
            std::thread::sleep(delay.min(self.timeout - elapsed));
            delay = (delay * 2).min(self.poll_max);
        }
    }
}

fn bridge_io(path: &Path, e: csv::Error) -> Error {
    Error::Bridge(format!("{}: {e}", path.display()))
}

fn read_predictions(path: &Path, req: &PredictRequest) -> Result<Prediction> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| bridge_io(path, e))?;
    let width = if req.task.is_classification() { req.n_classes } else { 1 };
    let mut values = Vec::new();
    let mut rows = 0;
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bridge_io(path, e))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        let parsed = match parsed {
            Ok(p) => p,
            Err(_) if line == 0 => continue,
            Err(_) => return Err(Error::Bridge(format!("{}:{}: non-numeric prediction", path.display(), line + 1))),
        };
        if parsed.len() != width {
            return Err(Error::Bridge(format!(
                "{}:{}: expected {width} columns, got {}",
                path.display(),
                line + 1,
                parsed.len()
            )));
        }
        values.extend(parsed);
        rows += 1;
    }
    let pred = if req.task.is_classification() {
        Prediction::Probabilities(Array2::from_shape_vec((rows, width), values).expect("shape"))
    } else {
        Prediction::Values(values)
    };
    pred.validate(req.n_test(), req.n_classes)
        .map_err(|e| Error::Bridge(format!("malformed response: {e}")))?;
    Ok(pred)
}

impl Predictor for BridgeClient {
    fn name(&self) -> String {
        "bridge".into()
    }

    fn predict(&self, req: &PredictRequest) -> Result<Prediction> {
        let dir = self.submit(req)?;
        self.wait(&dir, req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::echo::{process_pending, EchoBridge};
    use ndarray::array;

    fn classification(n_classes: usize, n_train: usize) -> PredictRequest {
        PredictRequest::new(
            Array2::from_shape_fn((n_train, 2), |(i, j)| (i + j) as f64),
            TrainLabels::Classes((0..n_train).map(|i| (i % n_classes) as u32).collect()),
            array![[0.5, f64::NAN], [1.0, 2.0], [3.0, 4.0]],
            TaskKind::Multiclass,
            n_classes,
        )
        .unwrap()
    }

    #[test]
    fn limits_are_checked_before_dispatch() {
        let dir = tempfile::tempdir().unwrap();
        let client = BridgeClient::new(dir.path(), Duration::from_secs(1));
        let err = client.predict(&classification(11, 20)).unwrap_err();
        assert!(matches!(err, Error::LimitViolation(_)), "{err}");
        let err = client.predict(&classification(2, 10_001)).unwrap_err();
        assert!(matches!(err, Error::LimitViolation(_)));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn wire_format() {
        let dir = tempfile::tempdir().unwrap();
        let client = BridgeClient::new(dir.path(), Duration::from_secs(1));
        let req = classification(3, 4);
        let req_dir = client.submit(&req).unwrap();
        let train = fs::read_to_string(req_dir.join(TRAIN_FILE)).unwrap();
        assert_eq!(train.lines().next().unwrap(), "x0,x1,__target__");
        assert_eq!(train.lines().nth(2).unwrap(), "1,2,1");
        let test = fs::read_to_string(req_dir.join(TEST_FILE)).unwrap();
        assert_eq!(test.lines().nth(1).unwrap(), "0.5,NaN");
        let meta: BridgeMeta = crate::io::read_json(&req_dir.join(META_FILE)).unwrap();
        assert_eq!((meta.task, meta.n_classes, meta.n_test), (TaskKind::Multiclass, 3, 3));
        assert_eq!(fs::read(req_dir.join(READY)).unwrap(), b"");
    }

    #[test]
    fn echo_round_trip_classification_and_regression() {
        let dir = tempfile::tempdir().unwrap();
        let _echo = EchoBridge::spawn(dir.path());
        let client = BridgeClient::new(dir.path(), Duration::from_secs(10));
        let Prediction::Probabilities(p) = client.predict(&classification(4, 50)).unwrap() else { unreachable!() };
        assert!(p.iter().all(|v| *v == 0.25));
        assert_eq!(p.nrows(), 3);

        let req = PredictRequest::new(
            Array2::zeros((3, 1)),
            TrainLabels::Values(vec![1.0, 2.0, 6.0]),
            Array2::zeros((2, 1)),
            TaskKind::Regression,
            0,
        )
        .unwrap();
        assert_eq!(client.predict(&req).unwrap(), Prediction::Values(vec![3.0, 3.0]));
    }

    #[test]
    fn error_file_and_malformed_reply() {
        let dir = tempfile::tempdir().unwrap();
        let mut client = BridgeClient::new(dir.path(), Duration::from_secs(5));
        client.limits.max_classes = 20;
        let req_dir = client.submit(&classification(11, 20)).unwrap();
        process_pending(dir.path()).unwrap();
        assert!(req_dir.join(ERROR).exists() && !req_dir.join(DONE).exists());
        let err = client.wait(&req_dir, &classification(11, 20)).unwrap_err();
        assert!(matches!(err, Error::Bridge(ref m) if m.contains("10 classes")), "{err}");

        let req = classification(2, 5);
        let req_dir = client.submit(&req).unwrap();
        fs::write(req_dir.join(PREDICTIONS_FILE), "p0,p1\n0.9,0.3\n0.5,0.5\n0.5,0.5\n").unwrap();
        fs::write(req_dir.join(DONE), b"").unwrap();
        assert!(matches!(client.wait(&req_dir, &req), Err(Error::Bridge(_))));
    }

    #[test]
    fn timeout_without_bridge() {
        let dir = tempfile::tempdir().unwrap();
        let client = BridgeClient::new(dir.path(), Duration::from_millis(50));
        assert!(matches!(client.predict(&classification(2, 5)), Err(Error::BridgeTimeout(_))));
    }
}
