//! In-process stand-in for the external backbone that answers every bridge
//! request with uninformative predictions: uniform class probabilities, or
//! the training mean for regression. Requests over the class or training-row
//! caps get an `ERROR` file instead.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::bridge::{BridgeLimits, BridgeMeta, DONE, ERROR, META_FILE, PREDICTIONS_FILE, READY, TARGET_COLUMN, TEST_FILE, TRAIN_FILE};
use crate::error::{Error, Result};

fn answer(dir: &Path) -> Result<()> {
    let meta: BridgeMeta = crate::io::read_json(&dir.join(META_FILE))?;
    let limits = BridgeLimits::default();
    let refuse = if meta.task.is_classification() && meta.n_classes > limits.max_classes {
        Some(format!("class cap exceeded: at most {} classes are supported, got {}", limits.max_classes, meta.n_classes))
    } else if meta.n_train > limits.max_train {
        Some(format!("training rows exceed the cap of {}", limits.max_train))
    } else {
        None
    };
    if let Some(msg) = refuse {
        let path = dir.join(ERROR);
        return fs::write(&path, msg).map_err(|e| Error::io(&path, e));
    }

    let test_path = dir.join(TEST_FILE);
    let n_test = csv::Reader::from_path(&test_path)
        .map_err(|e| Error::Bridge(e.to_string()))?
        .records()
        .count();
    let mut out = String::new();
    if meta.task.is_classification() {
        let header: Vec<String> = (0..meta.n_classes).map(|c| format!("p{c}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        let p = 1.0 / meta.n_classes as f64;
        let row = vec![p.to_string(); meta.n_classes].join(",");
        for _ in 0..n_test {
            out.push_str(&row);
            out.push('\n');
        }
    } else {
        let train_path = dir.join(TRAIN_FILE);
        let mut r = csv::Reader::from_path(&train_path).map_err(|e| Error::Bridge(e.to_string()))?;
        let col = r
            .headers()
            .map_err(|e| Error::Bridge(e.to_string()))?
            .iter()
            .position(|h| h == TARGET_COLUMN)
            .ok_or_else(|| Error::Bridge("train.csv has no target column".into()))?;
        let (mut sum, mut n) = (0.0, 0usize);
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Bridge(e.to_string()))?;
            sum += rec[col].parse::<f64>().map_err(|e| Error::Bridge(e.to_string()))?;
            n += 1;
        }
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        out.push_str("prediction\n");
        for _ in 0..n_test {
            out.push_str(&format!("{mean}\n"));
        }
    }
    let path = dir.join(PREDICTIONS_FILE);
    fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    let done = dir.join(DONE);
    fs::write(&done, b"").map_err(|e| Error::io(&done, e))
}

/// Answers every request under `watch_dir` that is ready and not yet answered.
/// Returns the number of requests handled.
pub fn process_pending(watch_dir: &Path) -> Result<usize> {
    let mut handled = 0;
    let mut dirs: Vec<PathBuf> = fs::read_dir(watch_dir)
        .map_err(|e| Error::io(watch_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for dir in dirs {
        if dir.join(READY).exists() && !dir.join(DONE).exists() && !dir.join(ERROR).exists() {
            if let Err(e) = answer(&dir) {
                let path = dir.join(ERROR);
                fs::write(&path, e.to_string()).map_err(|e| Error::io(&path, e))?;
            }
            handled += 1;
        }
    }
    Ok(handled)
}

/// Background thread running [`process_pending`] until dropped.
pub struct EchoBridge {
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl EchoBridge {
    pub fn spawn(watch_dir: &Path) -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let dir = watch_dir.to_path_buf();
        let handle = std::thread::spawn(move || {
            while !flag.load(Ordering::Relaxed) {
                let _ = process_pending(&dir);
                std::thread::sleep(Duration::from_millis(2));
            }
        });
        EchoBridge {
            stop,
            handle: Some(handle),
        }
    }
}

impl Drop for EchoBridge {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
