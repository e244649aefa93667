//! A capitulation tower for a module with one inertia generator.

use iwasawa::towers::{capitulation_tower, InertiaDatum, LambdaPresentation};
use iwasawa::{Expr, GammaVector, GroupRing, TightSet};

fn main() -> iwasawa::Result<()> {
    let ring = GroupRing::new(3, 1, 3, 4)?;
    let x = LambdaPresentation::cyclic(vec![Expr::omega(GammaVector::basis(1, 0), 0)]);
    let inertia = InertiaDatum::new(vec![(0, vec![Expr::Int(1)])]);
    let rep = capitulation_tower(&x, &TightSet::standard(1), &inertia, 3, 3, &ring, 10_000)?;
    for q in &rep.quotients {
        println!("A_{}: exponents {:?}", q.n, q.exponents);
    }
    println!("largest kernel 3^{}", rep.max_order_exp());
    Ok(())
}
