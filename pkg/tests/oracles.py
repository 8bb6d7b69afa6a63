"""Independent reference implementations used only by the tests.

These share no code with the package: plain Python loops and dicts for the
n-gram and tf-idf references, and a generic QP solver for the SVM.
"""

import math

import numpy as np


def brute_char_ngrams(text, lo, hi, lowercase=True):
    """Enumerate every (start, length) window of the whitespace-collapsed text."""
    chars = []
    prev_space = False
    for c in text:
        if c.isspace():
            if not prev_space:
                chars.append(" ")
            prev_space = True
        else:
            chars.append(c)
            prev_space = False
    norm = "".join(chars)
    if lowercase:
        norm = norm.lower()
    out = {}
    for start in range(len(norm)):
        for n in range(lo, hi + 1):
            if start + n <= len(norm):
                g = norm[start:start + n]
                out[g] = out.get(g, 0) + 1
    return out


def reference_tfidf(train_docs, test_docs):
    """Smoothed idf on ``train_docs`` (list of term->count dicts), L2-normalised tf-idf rows.

    Returns (terms, idf dict, list of term->weight dicts for ``test_docs``).
    """
    terms = sorted({t for d in train_docs for t in d})
    n = len(train_docs)
    idf = {}
    for t in terms:
        df = sum(1 for d in train_docs if d.get(t, 0) > 0)
        idf[t] = math.log((1 + n) / (1 + df)) + 1
    rows = []
    for d in test_docs:
        w = {t: c * idf[t] for t, c in d.items() if t in idf and c}
        norm = math.sqrt(sum(v * v for v in w.values()))
        rows.append({t: v / norm for t, v in w.items()} if norm > 0 else {})
    return terms, idf, rows


def qp_binary_svm(X, y, C):
    """Primal soft-margin SVM with a regularised bias, solved as a QP by cvxpy.

    minimise 0.5 (|w|^2 + b^2) + C sum xi  s.t.  y_i (w.x_i + b) >= 1 - xi, xi >= 0
    """
    import cvxpy as cp

    n, d = X.shape
    w = cp.Variable(d)
    b = cp.Variable()
    xi = cp.Variable(n)
    cons = [cp.multiply(y, X @ w + b) >= 1 - xi, xi >= 0]
    prob = cp.Problem(cp.Minimize(0.5 * (cp.sum_squares(w) + cp.square(b)) + C * cp.sum(xi)), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return np.asarray(w.value, dtype=float), float(b.value), float(prob.value)


def qp_ovr_predict(X_train, labels, X_test, C):
    """One-vs-rest prediction from per-class QP solutions, ties to the first class."""
    classes = sorted(set(labels))
    y = np.asarray(labels)
    scores = []
    for c in classes:
        w, b, _ = qp_binary_svm(X_train, np.where(y == c, 1.0, -1.0), C)
        scores.append(X_test @ w + b)
    scores = np.column_stack(scores)
    return [classes[i] for i in np.argmax(scores, axis=1)], scores
