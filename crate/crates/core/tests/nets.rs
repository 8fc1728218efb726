use forage_core::drqn::{DrqnConfig, QNetParams, Transition};
use forage_core::nets::{
    Activation, Architecture, FfnParams, LstmParams, NetParams, NetShape, ObservationWindow,
};
use forage_core::rng::stream;
use rand::Rng;

const H: f64 = 1e-6;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Straight-line evaluation of `W2^T tanh(W1^T x + b1) + b2` from the flat
/// layout, written without the library's helpers.
fn ffn_reference(p: &FfnParams, x: &[f64]) -> Vec<f64> {
    let (n, h, k) = (p.input_dim(), p.hidden(), p.outputs());
    let d = p.data();
    let (w1, rest) = d.split_at(n * h);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h * k);
    let mut hidden = vec![0.0; h];
    for j in 0..h {
        let mut s = b1[j];
        for i in 0..n {
            s += x[i] * w1[i * h + j];
        }
        hidden[j] = s.tanh();
    }
    (0..k)
        .map(|o| b2[o] + (0..h).map(|j| hidden[j] * w2[j * k + o]).sum::<f64>())
        .collect()
}

/// Reference LSTM recursion over the whole window from a zero state.
fn lstm_reference(p: &LstmParams, window: &[Vec<f64>]) -> Vec<f64> {
    let (n, h, k) = (p.input_dim(), p.hidden(), p.outputs());
    let d = p.data();
    let rows = n + h;
    let w = |gate: usize, r: usize, j: usize| d[gate * rows * h + r * h + j];
    let b = |gate: usize, j: usize| d[4 * rows * h + gate * h + j];
    let mut hs = vec![0.0; h];
    let mut cs = vec![0.0; h];
    for x in window {
        let z: Vec<f64> = x.iter().chain(hs.iter()).copied().collect();
        let pre = |gate: usize, j: usize| b(gate, j) + (0..rows).map(|r| z[r] * w(gate, r, j)).sum::<f64>();
        let mut new_h = vec![0.0; h];
        for j in 0..h {
            let i = sigmoid(pre(0, j));
            let f = sigmoid(pre(1, j));
            let g = pre(2, j).tanh();
            let o = sigmoid(pre(3, j));
            cs[j] = f * cs[j] + i * g;
            new_h[j] = o * cs[j].tanh();
        }
        hs = new_h;
    }
    let off = 4 * (rows * h + h);
    (0..k)
        .map(|o| d[off + h * k + o] + (0..h).map(|j| hs[j] * d[off + j * k + o]).sum::<f64>())
        .collect()
}

fn random_window<R: Rng>(dim: usize, len: usize, capacity: usize, rng: &mut R) -> ObservationWindow {
    let mut w = ObservationWindow::new(capacity);
    for _ in 0..len {
        w.push((0..dim).map(|_| rng.random_range(-1.0..1.5)).collect());
    }
    w
}

/// Central differences of `scores . output_grad` with respect to every
/// parameter.
fn numeric_gradient(net: &NetParams, window: &ObservationWindow, og: &[f64]) -> Vec<f64> {
    let f = |p: &NetParams| -> f64 {
        p.scores(window).unwrap().iter().zip(og).map(|(s, g)| s * g).sum()
    };
    let mut probe = net.clone();
    (0..net.len())
        .map(|i| {
            let w = net.data()[i];
            probe.data_mut()[i] = w + H;
            let up = f(&probe);
            probe.data_mut()[i] = w - H;
            let down = f(&probe);
            probe.data_mut()[i] = w;
            (up - down) / (2.0 * H)
        })
        .collect()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}

#[test]
fn ffn_matches_reference_evaluation() {
    let mut rng = stream(11, 0);
    for k in [2, 4] {
        let shape = NetShape::standard(Architecture::Ffn, k);
        for _ in 0..200 {
            let NetParams::Ffn(p) = NetParams::init(&shape, &mut rng) else { unreachable!() };
            let x: Vec<f64> = (0..shape.input_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = p.forward(&x).unwrap();
            for (g, e) in got.iter().zip(ffn_reference(&p, &x)) {
                assert!((g - e).abs() <= 1e-12, "{g} vs {e}");
            }
        }
    }
}

#[test]
fn lstm_matches_reference_recursion() {
    let mut rng = stream(12, 0);
    let shape = NetShape::standard(Architecture::Lstm, 4);
    for _ in 0..100 {
        let NetParams::Lstm(mut p) = NetParams::init(&shape, &mut rng) else { unreachable!() };
        // Nonzero biases exercise the bias paths too.
        for v in p.data_mut().iter_mut() {
            if *v == 0.0 {
                *v = rng.random_range(-0.5..0.5);
            }
        }
        let window = random_window(shape.input_dim, 25, 25, &mut rng);
        let seq: Vec<Vec<f64>> = window.iter().map(|x| x.to_vec()).collect();
        let got = p.forward(&window).unwrap().scores;
        for (g, e) in got.iter().zip(lstm_reference(&p, &seq)) {
            assert!((g - e).abs() <= 1e-10, "{g} vs {e}");
        }
    }
}

#[test]
fn ffn_gradient_matches_finite_differences() {
    let mut rng = stream(13, 0);
    let mut worst = 0.0f64;
    for i in 0..120 {
        let k = if i % 2 == 0 { 2 } else { 4 };
        let mut shape = NetShape::standard(Architecture::Ffn, k);
        shape.activation = [Activation::Tanh, Activation::Logistic][i % 2];
        let net = NetParams::init(&shape, &mut rng);
        let window = random_window(shape.input_dim, 1, 1, &mut rng);
        let og: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = net.gradient(&window, &og).unwrap();
        worst = worst.max(relative_error(&analytic, &numeric_gradient(&net, &window, &og)));
    }
    assert!(worst <= 1e-4, "worst relative error {worst}");
}

#[test]
fn lstm_gradient_matches_finite_differences() {
    let mut rng = stream(14, 0);
    let shape = NetShape::standard(Architecture::Lstm, 4);
    let mut worst = 0.0f64;
    for i in 0..120 {
        let net = NetParams::init(&shape, &mut rng);
        // Every fourth instance uses a full window; the rest vary the length.
        let len = if i % 4 == 0 { 25 } else { rng.random_range(1..=25) };
        let window = random_window(shape.input_dim, len, 25, &mut rng);
        let og: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = net.gradient(&window, &og).unwrap();
        worst = worst.max(relative_error(&analytic, &numeric_gradient(&net, &window, &og)));
    }
    assert!(worst <= 1e-4, "worst relative error {worst}");
}

#[test]
fn lstm_is_causal() {
    let mut rng = stream(15, 0);
    let shape = NetShape::standard(Architecture::Lstm, 2);
    for _ in 0..50 {
        let net = NetParams::init(&shape, &mut rng);
        let full = random_window(shape.input_dim, 10, 25, &mut rng);
        let seq: Vec<Vec<f64>> = full.iter().map(|x| x.to_vec()).collect();
        // Outputs over every prefix depend only on that prefix.
        for cut in 1..seq.len() {
            let mut prefix = ObservationWindow::new(25);
            for x in &seq[..cut] {
                prefix.push(x.clone());
            }
            let mut altered = prefix.clone();
            altered.push(vec![9.0; shape.input_dim]);
            assert_eq!(
                net.scores(&prefix).unwrap(),
                net.scores(&altered.without_latest()).unwrap()
            );
        }
    }
}

#[test]
fn window_of_one_is_a_single_cell() {
    let mut rng = stream(16, 0);
    let shape = NetShape::standard(Architecture::Lstm, 4);
    let net = NetParams::init(&shape, &mut rng);
    let NetParams::Lstm(p) = &net else { unreachable!() };
    let w = random_window(shape.input_dim, 1, 25, &mut rng);
    let seq = vec![w.latest().unwrap().to_vec()];
    let got = p.forward(&w).unwrap().scores;
    for (g, e) in got.iter().zip(lstm_reference(p, &seq)) {
        assert!((g - e).abs() <= 1e-12);
    }
}

#[test]
fn td_loss_gradient_matches_finite_differences() {
    let mut rng = stream(17, 0);
    for arch in [Architecture::Ffn, Architecture::Lstm] {
        let shape = NetShape::standard(arch, 4);
        for _ in 0..20 {
            let q = QNetParams::new(NetParams::init(&shape, &mut rng), &DrqnConfig::default()).unwrap();
            let prev = random_window(shape.input_dim, shape.window, shape.window, &mut rng);
            let next = random_window(shape.input_dim, shape.window, shape.window, &mut rng);
            let t = Transition {
                prev,
                action: rng.random_range(0..4),
                reward: rng.random_range(-1.0..1.0),
                next: Some(next),
                terminal: false,
            };
            let (_, grad) = q.loss_and_gradient(&t).unwrap();
            // The target is held fixed: differentiate only through Q(prev, a).
            let y = q.target(&t).unwrap();
            let loss = |net: &NetParams| 0.5 * (y - net.scores(&t.prev).unwrap()[t.action]).powi(2);
            let mut probe = q.net.clone();
            let numeric: Vec<f64> = (0..probe.len())
                .map(|i| {
                    let w = q.net.data()[i];
                    probe.data_mut()[i] = w + H;
                    let up = loss(&probe);
                    probe.data_mut()[i] = w - H;
                    let down = loss(&probe);
                    probe.data_mut()[i] = w;
                    (up - down) / (2.0 * H)
                })
                .collect();
            assert!(relative_error(&grad, &numeric) <= 1e-4);
        }
    }
}

#[test]
fn td_step_reduces_loss_for_small_rates() {
    let mut rng = stream(18, 0);
    let shape = NetShape::standard(Architecture::Ffn, 2);
    let cfg = DrqnConfig { learning_rate: 1e-3, gamma: 0.0, ..DrqnConfig::default() };
    let mut q = QNetParams::new(NetParams::init(&shape, &mut rng), &cfg).unwrap();
    let t = Transition {
        prev: random_window(shape.input_dim, 1, 1, &mut rng),
        action: 1,
        reward: 1.0,
        next: None,
        terminal: true,
    };
    let (before, _) = q.loss_and_gradient(&t).unwrap();
    q.td_update(&t).unwrap();
    let (after, _) = q.loss_and_gradient(&t).unwrap();
    assert!(after < before);
}

#[test]
fn init_weights_have_zero_mean() {
    let mut rng = stream(19, 0);
    let shape = NetShape::standard(Architecture::Lstm, 4);
    let mut values = Vec::new();
    while values.len() < 10_000 {
        let net = NetParams::init(&shape, &mut rng);
        values.extend(net.data().iter().copied().filter(|v| *v != 0.0));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!(mean.abs() < 0.02, "mean {mean}");
    assert!(values.iter().all(|v| v.abs() <= 0.5));
}
