//! ROC curve and confusion matrix from plain scores.
use covhole::svc::{confusion_at, metrics, operating_point, roc_from_scores};

fn main() -> covhole::Result<()> {
    // low scores mean "hole" (label 0)
    let scores = [-2.0, -1.5, -0.4, 0.1, -0.2, 0.3, 0.8, 1.1, 1.6, 2.4];
    let labels = [0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
    let roc = roc_from_scores(&scores, &labels)?;
    println!("AUC {:.3}", roc.auc);
    for p in &roc.points {
        println!("threshold {:>6}: TPR {:.2} FPR {:.2}", p.threshold, p.tpr, p.fpr);
    }
    let op = operating_point(&roc)?;
    let cm = confusion_at(&scores, &labels, op.threshold);
    let m = metrics(&cm);
    println!("best g-mean {:.3} at {}: {:?}", op.gmean, op.threshold, cm);
    println!("PPV {:?}, accuracy {:?}", m.ppv, m.accuracy);
    Ok(())
}
