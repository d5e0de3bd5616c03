use super::{Func, Node};

/// Symbolic derivative with respect to the free variable.
pub(super) fn derivative(n: &Node) -> Node {
    match n {
        Node::Num(_) => Node::Num(0.0),
        Node::Var => Node::Num(1.0),
        Node::Neg(a) => Node::neg(derivative(a)),
        Node::Add(a, b) => Node::add(derivative(a), derivative(b)),
        Node::Sub(a, b) => Node::sub(derivative(a), derivative(b)),
        Node::Mul(a, b) => Node::add(
            Node::mul(derivative(a), (**b).clone()),
            Node::mul((**a).clone(), derivative(b)),
        ),
        Node::Div(a, b) => {
            let da = derivative(a);
            let db = derivative(b);
            if db.as_num() == Some(0.0) {
                Node::div(da, (**b).clone())
            } else {
                Node::div(
                    Node::sub(Node::mul(da, (**b).clone()), Node::mul((**a).clone(), db)),
                    Node::pow((**b).clone(), 2),
                )
            }
        }
        Node::Pow(a, k) => Node::mul(
            Node::mul(Node::Num(*k as f64), Node::pow((**a).clone(), k - 1)),
            derivative(a),
        ),
        Node::Call(f, a) => {
            let inner = (**a).clone();
            let outer = match f {
                Func::Sin => Node::call(Func::Cos, inner),
                Func::Cos => Node::neg(Node::call(Func::Sin, inner)),
                Func::Tan => Node::div(Node::Num(1.0), Node::pow(Node::call(Func::Cos, inner), 2)),
                Func::Sinh => Node::call(Func::Cosh, inner),
                Func::Cosh => Node::call(Func::Sinh, inner),
                Func::Tanh => {
                    Node::div(Node::Num(1.0), Node::pow(Node::call(Func::Cosh, inner), 2))
                }
                Func::Exp => Node::call(Func::Exp, inner),
                Func::Log => Node::div(Node::Num(1.0), inner),
                Func::Sqrt => Node::div(
                    Node::Num(1.0),
                    Node::mul(Node::Num(2.0), Node::call(Func::Sqrt, inner)),
                ),
                Func::Atan => Node::div(
                    Node::Num(1.0),
                    Node::add(Node::Num(1.0), Node::pow(inner, 2)),
                ),
            };
            chain(outer, derivative(a))
        }
    }
}

/// `outer·inner'`, written as a quotient when `outer` is `1/x`.
fn chain(outer: Node, d_inner: Node) -> Node {
    match outer {
        Node::Div(num, den) if num.as_num() == Some(1.0) => Node::div(d_inner, *den),
        other => Node::mul(other, d_inner),
    }
}
