use aggrnet::train::{confusion_matrix, weighted_f1, EvalReport};
use aggrnet::Class::{self, *};

fn main() {
    let gold = [Cag, Cag, Cag, Nag, Nag, Nag, Nag, Nag, Oag, Oag];
    let pred = [Cag, Nag, Oag, Nag, Nag, Nag, Cag, Nag, Oag, Cag];

    let cm = confusion_matrix(&gold, &pred).unwrap();
    println!("rows = gold, columns = predicted (CAG NAG OAG)");
    for (c, row) in Class::ALL.iter().zip(cm.0) {
        println!("{c}  {row:?}");
    }
    for c in Class::ALL {
        let m = cm.class_metrics(c);
        println!("{c}: precision {:.3} recall {:.3} f1 {:.3} support {}", m.precision, m.recall, m.f1, m.support);
    }
    println!("weighted F1 = {:.4}", weighted_f1(&gold, &pred).unwrap());

    // a class nobody predicts contributes zero precision, not NaN
    let never_oag = [Cag, Nag, Nag, Cag];
    let r = EvalReport::new(&[Cag, Nag, Oag, Oag], &never_oag).unwrap();
    println!("\n{}", r.to_toml().unwrap());
}
