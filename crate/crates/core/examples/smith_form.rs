//! Smith form, kernels and module invariants over Z/p^N.

use iwasawa::linalg::{FiniteModulePresentation, Matrix};
use iwasawa::padic::Zpn;

fn main() -> iwasawa::Result<()> {
    let f = Zpn::new(3, 3)?;
    let m = Matrix::from_i64(f, &[vec![3, 6, 9], vec![9, 0, 3], vec![0, 3, 3]])?;
    let s = m.smith_form();
    println!("diagonal valuations: {:?}", s.exps);
    let (u, v) = (s.u.clone().unwrap(), s.v.clone().unwrap());
    assert_eq!(u.mul(&m)?.mul(&v)?, s.d);
    println!("kernel order 3^{} with {} generators", m.kernel_order_exp(), m.kernel().len());

    let pres = FiniteModulePresentation::new(3, m.transpose())?;
    let inv = pres.invariants();
    println!("cokernel exponents {:?}, p-rank {}, order 3^{}", inv.exponents, inv.p_rank(), inv.order_exp());
    Ok(())
}
