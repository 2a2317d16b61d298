use ndarray::ArrayView2;

use super::EvalError;

fn check_lengths(a: usize, b: usize) -> Result<(), EvalError> {
    if a != b {
        return Err(EvalError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(EvalError::Empty);
    }
    Ok(())
}

pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    let hits = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Counts indexed `[truth][predicted]`.
pub fn confusion_matrix(truth: &[usize], pred: &[usize], n_classes: usize) -> Result<Vec<Vec<u64>>, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(pred) {
        if t >= n_classes || p >= n_classes {
            return Err(EvalError::ClassOutOfRange(t.max(p)));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

fn recall(truth: &[usize], pred: &[usize], class_is: impl Fn(usize) -> bool) -> Result<f64, EvalError> {
    let (mut hit, mut total) = (0usize, 0usize);
    for (&t, &p) in truth.iter().zip(pred) {
        if class_is(t) {
            total += 1;
            hit += usize::from(class_is(p));
        }
    }
    if total == 0 {
        return Err(EvalError::MissingClass);
    }
    Ok(hit as f64 / total as f64)
}

/// Recall of `positive`.
pub fn sensitivity(truth: &[usize], pred: &[usize], positive: usize) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    recall(truth, pred, |c| c == positive)
}

/// Recall of everything that is not `positive`.
pub fn specificity(truth: &[usize], pred: &[usize], positive: usize) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    recall(truth, pred, |c| c != positive)
}

/// F1 of `positive`; 0 when it is never predicted nor present.
pub fn f1(truth: &[usize], pred: &[usize], positive: usize) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.iter().zip(pred) {
        match (t == positive, p == positive) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    Ok(if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 })
}

pub fn macro_f1(truth: &[usize], pred: &[usize], n_classes: usize) -> Result<f64, EvalError> {
    let mut total = 0.0;
    for c in 0..n_classes {
        total += f1(truth, pred, c)?;
    }
    Ok(total / n_classes as f64)
}

/// Mann-Whitney AUC with midranks, so tied scores count one half.
pub fn roc_auc(positive: &[bool], scores: &[f64]) -> Result<f64, EvalError> {
    check_lengths(positive.len(), scores.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::NonFinite);
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::DegenerateAuc);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end+1 share their mean
        let mid = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            if positive[i] {
                rank_sum += mid;
            }
        }
        start = end + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Unweighted mean of one-vs-rest AUCs over score columns.
pub fn macro_auc(truth: &[usize], scores: ArrayView2<f64>) -> Result<f64, EvalError> {
    check_lengths(truth.len(), scores.nrows())?;
    let k = scores.ncols();
    let mut total = 0.0;
    for c in 0..k {
        let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        let col: Vec<f64> = scores.column(c).to_vec();
        total += roc_auc(&positive, &col)?;
    }
    Ok(total / k as f64)
}

/// AUC of the score matrix: the last column for two classes, macro
/// one-vs-rest otherwise.
pub fn auc_from_scores(truth: &[usize], scores: ArrayView2<f64>) -> Result<f64, EvalError> {
    if scores.ncols() == 2 {
        let positive: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        roc_auc(&positive, &scores.column(1).to_vec())
    } else {
        macro_auc(truth, scores)
    }
}

/// `1 − SS_res / SS_tot`; errors if the truth is constant.
pub fn r2(truth: &[f64], pred: &[f64]) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    let ss_res: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    if ss_tot == 0.0 {
        return Err(EvalError::ConstantTruth);
    }
    Ok(1.0 - ss_res / ss_tot)
}

pub fn mae(truth: &[f64], pred: &[f64]) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    Ok(truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).sum::<f64>() / truth.len() as f64)
}

pub fn rmse(truth: &[f64], pred: &[f64]) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    Ok((truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum::<f64>() / truth.len() as f64).sqrt())
}

/// Normal-approximation 95% interval `mean ± 1.96·sd/√n` (sample SD).
pub fn ci95(values: &[f64]) -> Result<(f64, f64), EvalError> {
    if values.len() < 2 {
        return Err(EvalError::TooFew(values.len()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let half = 1.96 * sd / n.sqrt();
    Ok((mean - half, mean + half))
}

/// Index of the largest score; ties go to the lower index.
pub fn argmax(row: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in row.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}
