/* Elimination kernels. Column echelon is Gaussian over a field and a
 * division-free gcd reduction over Z; Smith normal form runs dense in mpz
 * with both transforms tracked. */
#include "optower/sparse.hpp"

#include <algorithm>
#include <tuple>

namespace ot {

Mat Mat::mul(const Mat& B, const Ring& R) const {
    OT_CHECK(cols == B.rows, "internal", "matrix product shape mismatch");
    Mat out(rows, B.cols);
    for (int j = 0; j < B.cols; ++j) {
        std::map<int, Q> acc;
        for (auto& [k, v] : B.c[j])
            for (auto& [i, w] : c[k]) {
                Q t = R.mul(w, v);
                auto it = acc.find(i);
                if (it == acc.end()) acc.emplace(i, t);
                else {
                    it->second = R.add(it->second, t);
                    if (it->second == 0) acc.erase(it);
                }
            }
        out.c[j] = std::move(acc);
    }
    return out;
}

Mat Mat::add(const Mat& B, const Ring& R) const {
    OT_CHECK(rows == B.rows && cols == B.cols, "internal", "matrix sum shape mismatch");
    Mat out = *this;
    for (int j = 0; j < cols; ++j)
        for (auto& [i, v] : B.c[j]) out.add(i, j, v, R);
    return out;
}

Mat Mat::sub(const Mat& B, const Ring& R) const {
    OT_CHECK(rows == B.rows && cols == B.cols, "internal", "matrix diff shape mismatch");
    Mat out = *this;
    for (int j = 0; j < cols; ++j)
        for (auto& [i, v] : B.c[j]) out.add(i, j, R.neg(v), R);
    return out;
}

Mat Mat::scaled(const Q& s, const Ring& R) const {
    Mat out(rows, cols);
    if (s == 0) return out;
    for (int j = 0; j < cols; ++j)
        for (auto& [i, v] : c[j]) out.c[j][i] = R.mul(v, s);
    return out;
}

Mat Mat::transpose() const {
    Mat out(cols, rows);
    for (int j = 0; j < cols; ++j)
        for (auto& [i, v] : c[j]) out.c[i][j] = v;
    return out;
}

Mat Mat::hcat(const Mat& B) const {
    OT_CHECK(rows == B.rows, "internal", "hcat row mismatch");
    Mat out(rows, cols + B.cols);
    for (int j = 0; j < cols; ++j) out.c[j] = c[j];
    for (int j = 0; j < B.cols; ++j) out.c[cols + j] = B.c[j];
    return out;
}

Mat Mat::vcat(const Mat& B) const {
    OT_CHECK(cols == B.cols, "internal", "vcat col mismatch");
    Mat out(rows + B.rows, cols);
    for (int j = 0; j < cols; ++j) {
        out.c[j] = c[j];
        for (auto& [i, v] : B.c[j]) out.c[j][rows + i] = v;
    }
    return out;
}

std::map<int, Q> Mat::apply(const std::map<int, Q>& v, const Ring& R) const {
    std::map<int, Q> acc;
    for (auto& [k, x] : v) {
        OT_CHECK(k >= 0 && k < cols, "internal", "vector index out of range");
        for (auto& [i, w] : c[k]) {
            Q t = R.mul(w, x);
            auto it = acc.find(i);
            if (it == acc.end()) acc.emplace(i, t);
            else {
                it->second = R.add(it->second, t);
                if (it->second == 0) acc.erase(it);
            }
        }
    }
    return acc;
}

bool Mat::operator==(const Mat& o) const {
    return rows == o.rows && cols == o.cols && c == o.c;
}

namespace {

void axpyCol(std::map<int, Q>& dst, const std::map<int, Q>& src, const Q& f, const Ring& R) {
    if (f == 0) return;
    for (auto& [i, v] : src) {
        Q t = R.mul(v, f);
        auto it = dst.find(i);
        if (it == dst.end()) dst.emplace(i, t);
        else {
            it->second = R.add(it->second, t);
            if (it->second == 0) dst.erase(it);
        }
    }
}

}  // namespace

Echelon columnEchelon(const Mat& m, const Ring& R, bool wantTransform) {
    const bool field = R.isField();
    std::vector<std::map<int, Q>> work = m.c;
    std::vector<std::map<int, Q>> trans;
    if (wantTransform) {
        trans.resize(m.cols);
        for (int j = 0; j < m.cols; ++j) trans[j][j] = 1;
    }
    std::vector<bool> frozen(m.cols, false);
    std::vector<int> rowCount(m.rows, 0);
    for (int j = 0; j < m.cols; ++j)
        for (auto& [i, v] : work[j]) { (void)v; ++rowCount[i]; }

    Echelon out;
    out.basis = Mat(m.rows, 0);
    out.transform = Mat(m.cols, 0);
    while (true) {
        // Pivot choice: Markowitz count over a field, minimal |value| first over Z
        // (so repeated gcd steps shrink entries); ties by lowest (row, col).
        int pi = -1, pj = -1;
        mpz_class bestAbs;
        long bestScore = 0;
        for (int j = 0; j < m.cols; ++j) {
            if (frozen[j] || work[j].empty()) continue;
            for (auto& [i, v] : work[j]) {
                if (field) {
                    long score = (long)(rowCount[i] - 1) * (long)(work[j].size() - 1);
                    if (pi < 0 || score < bestScore ||
                        (score == bestScore && std::tie(i, j) < std::tie(pi, pj))) {
                        bestScore = score; pi = i; pj = j;
                    }
                } else {
                    mpz_class a = abs(v.get_num());
                    if (pi < 0 || a < bestAbs ||
                        (a == bestAbs && std::tie(i, j) < std::tie(pi, pj))) {
                        bestAbs = a; pi = i; pj = j;
                    }
                }
            }
        }
        if (pi < 0) break;

        Q pv = work[pj].at(pi);
        bool clean = true;
        for (int j = 0; j < m.cols; ++j) {
            if (j == pj || frozen[j]) continue;
            auto it = work[j].find(pi);
            if (it == work[j].end()) continue;
            Q f;
            if (field) f = R.neg(R.div(it->second, pv));
            else {
                // Integer reduction: subtract the truncated quotient; a nonzero
                // remainder keeps the row live and a smaller pivot gets picked
                // next round.
                mpz_class q = it->second.get_num() / pv.get_num();
                if (q == 0) { clean = false; continue; }
                f = R.neg(Q(q));
            }
            std::vector<int> before;
            before.reserve(work[j].size());
            for (auto& [i, v] : work[j]) { (void)v; before.push_back(i); }
            axpyCol(work[j], work[pj], f, R);
            if (wantTransform) axpyCol(trans[j], trans[pj], f, R);
            for (int i : before) --rowCount[i];
            for (auto& [i, v] : work[j]) { (void)v; ++rowCount[i]; }
            if (!field && work[j].count(pi)) clean = false;
        }
        if (!field && !clean) continue;  // remainders left in the pivot row
        frozen[pj] = true;
        out.pivotRow.push_back(pi);
        if (!field && !(pv == 1 || pv == -1)) out.unitPivots = false;
        out.basis.cols += 1;
        out.basis.c.push_back(work[pj]);
        if (wantTransform) {
            out.transform.cols += 1;
            out.transform.c.push_back(trans[pj]);
        }
    }
    if (wantTransform)
        for (int j = 0; j < m.cols; ++j)
            if (!frozen[j] && work[j].empty()) {
                out.transform.c.push_back(trans[j]);
                out.transform.cols += 1;
                out.zeroCols.push_back(out.transform.cols - 1);
            }
    return out;
}

int rankField(const Mat& m, const Ring& R) {
    OT_CHECK(R.isField(), "wrong-ring", "rank over a non-field; use smithNormalForm over Z");
    return (int)columnEchelon(m, R).pivotRow.size();
}

int rankOp(const Mat& m, const Ring& R) { return rankField(m, R); }

Mat kernelField(const Mat& m, const Ring& R) {
    OT_CHECK(R.isField(), "wrong-ring", "kernel over a non-field");
    Echelon e = columnEchelon(m, R, true);
    Mat out(m.cols, (int)e.zeroCols.size());
    for (size_t k = 0; k < e.zeroCols.size(); ++k) out.c[k] = e.transform.c[e.zeroCols[k]];
    return out;
}

Mat imageField(const Mat& m, const Ring& R) {
    OT_CHECK(R.isField(), "wrong-ring", "image over a non-field");
    Echelon e = columnEchelon(m, R);
    return e.basis;
}

std::map<int, Q> reduceModulo(const Echelon& e, std::map<int, Q> v, const Ring& R) {
    for (int k = 0; k < (int)e.pivotRow.size(); ++k) {
        auto it = v.find(e.pivotRow[k]);
        if (it == v.end()) continue;
        Q f = R.neg(R.div(it->second, e.basis.c[k].at(e.pivotRow[k])));
        axpyCol(v, e.basis.c[k], f, R);
    }
    return v;
}

std::optional<Mat> solveField(const Mat& m, const Mat& B, const Ring& R) {
    OT_CHECK(R.isField(), "wrong-ring", "solve over a non-field");
    OT_CHECK(m.rows == B.rows, "internal", "solve shape mismatch");
    Echelon e = columnEchelon(m, R, true);
    Mat X(m.cols, B.cols);
    for (int j = 0; j < B.cols; ++j) {
        std::map<int, Q> v = B.c[j], coef;
        for (int k = 0; k < (int)e.pivotRow.size(); ++k) {
            auto it = v.find(e.pivotRow[k]);
            if (it == v.end()) continue;
            Q cfac = R.div(it->second, e.basis.c[k].at(e.pivotRow[k]));
            axpyCol(v, e.basis.c[k], R.neg(cfac), R);
            coef[k] = cfac;
        }
        if (!v.empty()) return std::nullopt;
        std::map<int, Q> x;
        for (auto& [k, f] : coef) axpyCol(x, e.transform.c[k], f, R);
        X.c[j] = std::move(x);
    }
    return X;
}

/* ---- Smith normal form (dense mpz, with transforms) ---- */

namespace {

struct DenseZ {
    int rows, cols;
    std::vector<std::vector<mpz_class>> a;
    DenseZ(int r, int k) : rows(r), cols(k), a(r, std::vector<mpz_class>(k, 0)) {}
    static DenseZ id(int n) {
        DenseZ d(n, n);
        for (int i = 0; i < n; ++i) d.a[i][i] = 1;
        return d;
    }
    void rowOp(int dst, int src, const mpz_class& f) {  // row dst += f * row src
        for (int j = 0; j < cols; ++j) a[dst][j] += f * a[src][j];
    }
    void colOp(int dst, int src, const mpz_class& f) {
        for (int i = 0; i < rows; ++i) a[i][dst] += f * a[i][src];
    }
    void swapRows(int x, int y) { std::swap(a[x], a[y]); }
    void swapCols(int x, int y) {
        for (int i = 0; i < rows; ++i) std::swap(a[i][x], a[i][y]);
    }
    void negRow(int x) { for (auto& v : a[x]) v = -v; }
};

}  // namespace

SNFResult smithNormalForm(const Mat& m, const Ring& R) {
    OT_CHECK(R.kind == RingKind::Z, "wrong-ring",
             "smithNormalForm requires the integers; over a field use rank");
    DenseZ A(m.rows, m.cols);
    for (int j = 0; j < m.cols; ++j)
        for (auto& [i, v] : m.c[j]) {
            OT_CHECK(v.get_den() == 1, "wrong-ring", "non-integer entry in SNF input");
            A.a[i][j] = v.get_num();
        }
    DenseZ U = DenseZ::id(m.rows), V = DenseZ::id(m.cols);

    int t = 0, n = std::min(m.rows, m.cols);
    while (t < n) {
        // Minimal |value| pivot in the trailing block, ties by lowest (row, col).
        int pi = -1, pj = -1;
        mpz_class best;
        for (int i = t; i < m.rows; ++i)
            for (int j = t; j < m.cols; ++j)
                if (A.a[i][j] != 0) {
                    mpz_class v = abs(A.a[i][j]);
                    if (pi < 0 || v < best) { best = v; pi = i; pj = j; }
                }
        if (pi < 0) break;
        if (pi != t) { A.swapRows(t, pi); U.swapRows(t, pi); }
        if (pj != t) { A.swapCols(t, pj); V.swapCols(t, pj); }

        bool again = true;
        while (again) {
            again = false;
            for (int i = t + 1; i < m.rows; ++i)
                if (A.a[i][t] != 0) {
                    mpz_class q = A.a[i][t] / A.a[t][t];
                    if (q != 0) { A.rowOp(i, t, -q); U.rowOp(i, t, -q); }
                    if (A.a[i][t] != 0) { A.swapRows(t, i); U.swapRows(t, i); again = true; }
                }
            for (int j = t + 1; j < m.cols; ++j)
                if (A.a[t][j] != 0) {
                    mpz_class q = A.a[t][j] / A.a[t][t];
                    if (q != 0) { A.colOp(j, t, -q); V.colOp(j, t, -q); }
                    if (A.a[t][j] != 0) { A.swapCols(t, j); V.swapCols(t, j); again = true; }
                }
        }
        // Divisibility: fold any non-multiple into the pivot row and restart the
        // reduction at this diagonal position.
        bool redo = false;
        for (int i = t + 1; i < m.rows && !redo; ++i)
            for (int j = t + 1; j < m.cols && !redo; ++j)
                if (A.a[i][j] % A.a[t][t] != 0) {
                    A.rowOp(t, i, 1); U.rowOp(t, i, 1);
                    redo = true;
                }
        if (redo) continue;
        if (A.a[t][t] < 0) { A.negRow(t); U.negRow(t); }
        ++t;
    }

    SNFResult out;
    out.U = Mat(m.rows, m.rows);
    out.V = Mat(m.cols, m.cols);
    out.D = Mat(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.rows; ++j)
            if (U.a[i][j] != 0) out.U.c[j][i] = Q(U.a[i][j]);
    for (int i = 0; i < m.cols; ++i)
        for (int j = 0; j < m.cols; ++j)
            if (V.a[i][j] != 0) out.V.c[j][i] = Q(V.a[i][j]);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j)
            if (A.a[i][j] != 0) out.D.c[j][i] = Q(A.a[i][j]);
    return out;
}

std::vector<mpz_class> SNFResult::invariantFactors() const {
    std::vector<mpz_class> out;
    int n = std::min(D.rows, D.cols);
    for (int i = 0; i < n; ++i) {
        Q v = D.get(i, i);
        if (v != 0) out.push_back(v.get_num());
    }
    return out;
}

Mat kernelZ(const Mat& m) {
    SNFResult s = smithNormalForm(m, ringZ());
    auto inv = s.invariantFactors();
    int r = (int)inv.size();
    Mat out(m.cols, m.cols - r);
    for (int k = r; k < m.cols; ++k) out.c[k - r] = s.V.c[k];
    return out;
}

std::optional<Mat> solveZ(const Mat& m, const Mat& B) {
    OT_CHECK(m.rows == B.rows, "internal", "solve shape mismatch");
    SNFResult s = smithNormalForm(m, ringZ());
    Ring R = ringZ();
    Mat UB = s.U.mul(B, R);
    auto inv = s.invariantFactors();
    int r = (int)inv.size();
    Mat Y(m.cols, B.cols);
    for (int j = 0; j < B.cols; ++j)
        for (auto& [i, v] : UB.c[j]) {
            if (i >= r) return std::nullopt;  // outside the image
            mpz_class num = v.get_num();
            if (num % inv[i] != 0) return std::nullopt;
            Y.c[j][i] = Q(num / inv[i]);
        }
    return s.V.mul(Y, R);
}

CokerPres cokernelPresentation(const Mat& m, const Ring& R) {
    CokerPres out;
    if (R.isField()) {
        out.freeRank = m.rows - rankField(m, R);
        return out;
    }
    SNFResult s = smithNormalForm(m, R);
    auto inv = s.invariantFactors();
    out.freeRank = m.rows - (long)inv.size();
    for (auto& d : inv)
        if (d > 1) out.torsion.push_back(d);
    return out;
}

}  // namespace ot
