#include "optower/operad.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace ot {

namespace {

std::vector<std::vector<int>> allPerms(int r) {
    std::vector<int> v(r);
    for (int i = 0; i < r; i++) v[i] = i + 1;
    std::vector<std::vector<int>> out;
    do out.push_back(v); while (std::next_permutation(v.begin(), v.end()));
    return out;
}

TensorComplex wrapOne(const ChainComplex& C) {
    if (C.bas.empty()) return tensorMany({&C}, 0, 0);
    return tensorMany({&C}, C.lowDegree(), C.topDegree());
}

TensorComplex keySource(const SymSeq& S, const std::vector<int>& key) {
    std::vector<const ChainComplex*> fac;
    for (int k : key) fac.push_back(&S.lev[k]);
    int lo = 0, hi = 0;
    for (auto* f : fac) {
        if (f->bas.empty()) return tensorMany(fac, 0, 0);
        lo += f->lowDegree();
        hi += f->topDegree();
    }
    return tensorMany(fac, lo, hi);
}

TensorComplex manySource(const std::vector<const ChainComplex*>& fac) {
    int lo = 0, hi = 0;
    for (auto* f : fac) {
        if (f->bas.empty()) return tensorMany(fac, 0, 0);
        lo += f->lowDegree();
        hi += f->topDegree();
    }
    return tensorMany(fac, lo, hi);
}

/* Composite of per factor maps fromFac[i] -> toFac[i], one applyOnFactors
 * step per factor. */
DegMap applyPerFactor(const std::vector<const ChainComplex*>& fromFac,
                      const std::vector<const ChainComplex*>& toFac,
                      const std::vector<const DegMap*>& maps,
                      const TensorComplex& src, const TensorComplex& dst, const Ring& R) {
    int k = (int)fromFac.size();
    DegMap acc;
    const TensorComplex* cur = &src;
    TensorComplex held;
    for (int i = 0; i < k; i++) {
        std::vector<const ChainComplex*> fac;
        for (int j = 0; j <= i; j++) fac.push_back(toFac[j]);
        for (int j = i + 1; j < k; j++) fac.push_back(fromFac[j]);
        TensorComplex next = (i == k - 1) ? TensorComplex{} : manySource(fac);
        const TensorComplex& tgt = (i == k - 1) ? dst : next;
        DegMap step = applyOnFactors(*cur, i, i, *maps[i], wrapOne(*fromFac[i]), *toFac[i], tgt, R);
        acc = (i == 0) ? std::move(step) : degCompose(acc, step, R);
        held = std::move(next);
        cur = (i == k - 1) ? &dst : &held;
    }
    return acc;
}

/* All tuples of `parts` entries >= 1 with total <= maxTotal. */
void comps(int parts, int maxTotal, const std::function<void(const std::vector<int>&)>& fn) {
    if (parts < 1 || maxTotal < parts) return;
    std::vector<int> cur(parts);
    std::function<void(int, int)> rec = [&](int i, int room) {
        if (i == parts) {
            fn(cur);
            return;
        }
        for (int v = 1; v <= room - (parts - 1 - i); v++) {
            cur[i] = v;
            rec(i + 1, room - v);
        }
    };
    rec(0, maxTotal);
}

std::string keyStr(const std::vector<int>& key) {
    std::string s = "(" + std::to_string(key[0]) + ";";
    for (size_t i = 1; i < key.size(); i++) s += (i > 1 ? "," : " ") + std::to_string(key[i]);
    return s + ")";
}

std::string wordLabel(const std::vector<int>& w) {
    std::string s = "w";
    for (int v : w) s += std::to_string(v);
    return s;
}

}  // namespace

void fillGammaSources(Operad& O) {
    O.gsrc.clear();
    for (auto& key : gammaKeys(O.seq.Rmax)) O.gsrc[key] = keySource(O.seq, key);
}

const DegMap& Operad::gammaAt(const std::vector<int>& key) const {
    static const DegMap empty;
    auto it = gam.find(key);
    return it == gam.end() ? empty : it->second;
}

const TensorComplex& Operad::sourceAt(const std::vector<int>& key) const {
    auto it = gsrc.find(key);
    OT_CHECK(it != gsrc.end(), "internal", "missing composition source for " + keyStr(key));
    return it->second;
}

std::vector<std::vector<int>> gammaKeys(int Rmax) {
    std::vector<std::vector<int>> keys;
    for (int t = 1; t <= Rmax; t++) {
        comps(t, Rmax, [&](const std::vector<int>& s) {
            std::vector<int> key;
            key.push_back(t);
            key.insert(key.end(), s.begin(), s.end());
            keys.push_back(key);
        });
    }
    return keys;
}

void checkOperadAxioms(const Operad& O) {
    const Ring& R = O.ring();
    const SymSeq& S = O.seq;
    S.validateActions();
    OT_CHECK(S.Rmax >= 1, "operad-axiom", "no level 1");
    const ChainComplex& L1 = S.lev[1];
    OT_CHECK(O.unitIdx >= 0 && O.unitIdx < L1.dim(0), "operad-axiom", "unit position out of range");
    if (O.unitary1)
        OT_CHECK(L1.totalDim() == 1 && L1.dim(0) == 1, "operad-axiom",
                 "level 1 marked unitary but not one dimensional in degree 0");

    // stored maps match their sources and commute with the differentials
    for (auto& [key, g] : O.gam) {
        int s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        OT_CHECK(s <= S.Rmax && (int)key.size() == key[0] + 1, "operad-axiom",
                 "malformed composition key " + keyStr(key));
        checkChainMap(O.sourceAt(key).C, S.lev[s], g);
    }

    // unit laws
    for (int r = 1; r <= S.Rmax; r++) {
        const ChainComplex& L = S.lev[r];
        if (L.bas.empty()) continue;
        std::vector<int> keyL = {1, r};
        const TensorComplex& srcL = O.sourceAt(keyL);
        const DegMap& gL = O.gammaAt(keyL);
        for (auto& [n, ls] : L.bas) {
            for (int xi = 0; xi < (int)ls.size(); xi++) {
                long p = srcL.ix.indexOf(n, {0, n}, {O.unitIdx, xi});
                std::map<int, Q> col;
                auto it = gL.find(n);
                if (it != gL.end()) col = it->second.c[p];
                bool ok = col.size() == 1 && col.count(xi) && col.at(xi) == 1;
                OT_CHECK(ok, "operad-axiom", "left unit law fails at level " + std::to_string(r));
            }
        }
        std::vector<int> keyR(r + 1, 1);
        keyR[0] = r;
        const TensorComplex& srcR = O.sourceAt(keyR);
        const DegMap& gR = O.gammaAt(keyR);
        for (auto& [n, ls] : L.bas) {
            std::vector<int> degs(r + 1, 0), idxs(r + 1, O.unitIdx);
            degs[0] = n;
            for (int vi = 0; vi < (int)ls.size(); vi++) {
                idxs[0] = vi;
                long p = srcR.ix.indexOf(n, degs, idxs);
                std::map<int, Q> col;
                auto it = gR.find(n);
                if (it != gR.end()) col = it->second.c[p];
                bool ok = col.size() == 1 && col.count(vi) && col.at(vi) == 1;
                OT_CHECK(ok, "operad-axiom", "right unit law fails at level " + std::to_string(r));
            }
        }
    }

    // lower equivariance: acting inside slot j matches the embedded
    // transposition on the output
    for (auto& [key, g] : O.gam) {
        int t = key[0], s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        const TensorComplex& src = O.sourceAt(key);
        if (src.C.bas.empty()) continue;
        int off = 0;
        for (int j = 1; j <= t; j++) {
            int sj = key[j];
            for (int i = 0; i + 1 < sj; i++) {
                DegMap inner = applyOnFactors(src, j, j, S.act[sj][i], wrapOne(S.lev[sj]),
                                              S.lev[sj], src, R);
                DegMap lhs = degCompose(inner, g, R);
                DegMap rhs = degCompose(g, S.act[s][off + i], R);
                OT_CHECK(degEqual(lhs, rhs), "operad-axiom",
                         "lower equivariance fails at " + keyStr(key));
            }
            off += sj;
        }
    }

    // upper equivariance: permuting slots matches the block permutation
    for (auto& [key, g] : O.gam) {
        int t = key[0], s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        const TensorComplex& src = O.sourceAt(key);
        if (src.C.bas.empty()) continue;
        std::vector<int> sizes(key.begin() + 1, key.end());
        for (int k = 0; k + 1 < t; k++) {
            std::vector<int> skey = key;
            std::swap(skey[1 + k], skey[2 + k]);
            const TensorComplex& sdst = O.sourceAt(skey);
            std::vector<int> srcOf(t + 1);
            for (int i = 0; i <= t; i++) srcOf[i] = i;
            std::swap(srcOf[1 + k], srcOf[2 + k]);
            DegMap P = tensorFactorPermute(src, sdst, srcOf, R);
            DegMap A0 = applyOnFactors(src, 0, 0, S.act[t][k], wrapOne(S.lev[t]),
                                       S.lev[t], src, R);
            DegMap lhs = degCompose(degCompose(A0, P, R), O.gammaAt(skey), R);
            std::vector<int> tau(t);
            for (int i = 0; i < t; i++) tau[i] = i + 1;
            std::swap(tau[k], tau[k + 1]);
            DegMap rhs = degCompose(g, S.actionMap(s, blockPermutation(tau, sizes)), R);
            OT_CHECK(degEqual(lhs, rhs), "operad-axiom",
                     "upper equivariance fails at " + keyStr(key));
        }
    }

    // associativity over every composable shape
    for (int t = 1; t <= S.Rmax; t++) {
        if (S.lev[t].bas.empty()) continue;
        comps(t, S.Rmax, [&](const std::vector<int>& tj) {
            int m = 0;
            for (int v : tj) m += v;
            comps(m, S.Rmax, [&](const std::vector<int>& si) {
                int s = 0;
                for (int v : si) s += v;
                std::vector<const ChainComplex*> allFac = {&S.lev[t]};
                for (int v : tj) allFac.push_back(&S.lev[v]);
                for (int v : si) allFac.push_back(&S.lev[v]);
                for (auto* f : allFac)
                    if (f->bas.empty()) return;
                TensorComplex Tall = manySource(allFac);
                if (Tall.C.bas.empty()) return;

                std::vector<int> keyV = {t};
                keyV.insert(keyV.end(), tj.begin(), tj.end());
                std::vector<int> keyU = {m};
                keyU.insert(keyU.end(), si.begin(), si.end());

                // compose the inner layer first
                DegMap M1 = applyOnFactors(Tall, 0, t, O.gammaAt(keyV), O.sourceAt(keyV),
                                           S.lev[m], O.sourceAt(keyU), R);
                DegMap lhs = degCompose(M1, O.gammaAt(keyU), R);

                // compose blockwise, reordering the inputs next to their slots
                std::vector<int> srcOf = {0};
                std::vector<const ChainComplex*> intFac = {&S.lev[t]};
                int upos = 0;
                std::vector<int> Mj(t);
                for (int j = 0; j < t; j++) {
                    srcOf.push_back(1 + j);
                    intFac.push_back(&S.lev[tj[j]]);
                    int mj = 0;
                    for (int a = 0; a < tj[j]; a++) {
                        srcOf.push_back(1 + t + upos);
                        intFac.push_back(&S.lev[si[upos]]);
                        mj += si[upos];
                        upos++;
                    }
                    Mj[j] = mj;
                }
                TensorComplex Tint = manySource(intFac);
                DegMap rhs = tensorFactorPermute(Tall, Tint, srcOf, R);

                std::vector<int> keyOuter = {t};
                keyOuter.insert(keyOuter.end(), Mj.begin(), Mj.end());
                const TensorComplex* cur = &Tint;
                TensorComplex held;
                upos = 0;
                std::vector<const ChainComplex*> curFac = intFac;
                for (int j = 0; j < t; j++) {
                    std::vector<int> keyJ = {tj[j]};
                    for (int a = 0; a < tj[j]; a++) keyJ.push_back(si[upos + a]);
                    int lo = 1 + j, hiF = 1 + j + tj[j];
                    std::vector<const ChainComplex*> nextFac(curFac.begin(), curFac.begin() + lo);
                    nextFac.push_back(&S.lev[Mj[j]]);
                    nextFac.insert(nextFac.end(), curFac.begin() + hiF + 1, curFac.end());
                    bool last = (j == t - 1);
                    TensorComplex next;
                    const TensorComplex* tgt;
                    if (last) {
                        tgt = &O.sourceAt(keyOuter);
                    } else {
                        next = manySource(nextFac);
                        tgt = &next;
                    }
                    DegMap step = applyOnFactors(*cur, lo, hiF, O.gammaAt(keyJ),
                                                 O.sourceAt(keyJ), S.lev[Mj[j]], *tgt, R);
                    rhs = degCompose(rhs, step, R);
                    upos += tj[j];
                    curFac = std::move(nextFac);
                    if (!last) {
                        held = std::move(next);
                        cur = &held;
                    }
                }
                rhs = degCompose(rhs, O.gammaAt(keyOuter), R);

                OT_CHECK(degEqual(lhs, rhs), "operad-axiom",
                         "associativity fails at " + keyStr(keyV) + " over " + keyStr(keyU));
            });
        });
    }
}

CheckReport operadAxiomReport(const Operad& O) {
    CheckReport r;
    try {
        checkOperadAxioms(O);
        r.pass = true;
    } catch (const Error& e) {
        r.code = e.code;
        r.witness = e.what();
    }
    return r;
}

Operad presetAs(const Ring& R, int Rmax) {
    OT_CHECK(Rmax >= 1, "bad-input", "operads need at least level 1");
    Operad O;
    O.name = "as";
    O.unitary1 = true;
    O.sigmaFree = true;
    O.unitIdx = 0;
    O.seq.ring = R;
    O.seq.Rmax = Rmax;
    O.seq.lev.assign(Rmax + 1, zeroComplex(R));
    O.seq.act.assign(Rmax + 1, {});

    std::vector<std::vector<std::vector<int>>> P(Rmax + 1);
    std::vector<std::map<std::vector<int>, int>> PI(Rmax + 1);
    for (int r = 1; r <= Rmax; r++) {
        P[r] = allPerms(r);
        std::vector<std::string> ls;
        for (int i = 0; i < (int)P[r].size(); i++) {
            PI[r][P[r][i]] = i;
            ls.push_back(wordLabel(P[r][i]));
        }
        O.seq.lev[r] = concentrated(R, 0, ls);
        for (int g = 0; g + 1 < r; g++) {
            Mat M((int)ls.size(), (int)ls.size());
            for (int i = 0; i < (int)ls.size(); i++) {
                std::vector<int> w = P[r][i];
                for (int& v : w) {
                    if (v == g + 1) v = g + 2;
                    else if (v == g + 2) v = g + 1;
                }
                M.set(PI[r][w], i, Q(1));
            }
            O.seq.act[r].push_back(DegMap{{0, M}});
        }
    }
    fillGammaSources(O);

    // composition concatenates the argument blocks in the order the outer
    // word visits them, each block carrying its own internal order
    for (auto& key : gammaKeys(Rmax)) {
        int t = key[0], s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        const TensorComplex& src = O.sourceAt(key);
        if (src.C.bas.empty()) continue;
        std::vector<int> off(t + 1, 0);
        for (int j = 1; j <= t; j++) off[j] = off[j - 1] + key[j];
        Mat M((int)P[s].size(), src.C.dim(0));
        for (long p = 0; p < src.C.dim(0); p++) {
            auto [degs, idxs] = src.ix.at(0, p);
            const std::vector<int>& v = P[t][idxs[0]];
            std::vector<int> res;
            for (int k = 0; k < t; k++) {
                int j = v[k];
                for (int l : P[key[j]][idxs[j]]) res.push_back(off[j - 1] + l);
            }
            M.set(PI[s][res], (int)p, Q(1));
        }
        O.gam[key] = DegMap{{0, M}};
    }
    return O;
}

Operad presetCom(const Ring& R, int Rmax) {
    OT_CHECK(Rmax >= 1, "bad-input", "operads need at least level 1");
    Operad O;
    O.name = "com";
    O.unitary1 = true;
    O.unitIdx = 0;
    O.seq.ring = R;
    O.seq.Rmax = Rmax;
    O.seq.lev.assign(Rmax + 1, zeroComplex(R));
    O.seq.act.assign(Rmax + 1, {});
    for (int r = 1; r <= Rmax; r++) {
        O.seq.lev[r] = concentrated(R, 0, {"c" + std::to_string(r)});
        for (int g = 0; g + 1 < r; g++) O.seq.act[r].push_back(DegMap{{0, Mat::id(1)}});
    }
    fillGammaSources(O);
    for (auto& key : gammaKeys(Rmax)) {
        const TensorComplex& src = O.sourceAt(key);
        Mat M(1, src.C.dim(0));
        for (int p = 0; p < src.C.dim(0); p++) M.set(0, p, Q(1));
        O.gam[key] = DegMap{{0, M}};
    }
    return O;
}

namespace {

/* Free operad basis elements are trees: leaves carry the input labels,
 * internal vertices carry a generator basis element of matching arity, and
 * children sit in increasing order of least leaf. */
struct TNode {
    int leaf = 0;          // 1-based leaf label when > 0
    int deg = 0, idx = 0;  // generator coordinates when internal
    std::vector<int> kids;
};
struct Tree {
    std::vector<TNode> nd;  // nd[0] is the root
};

int treeMinLeaf(const Tree& T, int v) {
    const TNode& n = T.nd[v];
    if (n.leaf > 0) return n.leaf;
    int m = 0;
    for (int k : n.kids) {
        int c = treeMinLeaf(T, k);
        if (m == 0 || c < m) m = c;
    }
    return m;
}

int subtreeDeg(const Tree& T, int v) {
    const TNode& n = T.nd[v];
    if (n.leaf > 0) return 0;
    int s = n.deg;
    for (int k : n.kids) s += subtreeDeg(T, k);
    return s;
}

void dfsInternal(const Tree& T, int v, std::vector<int>& out) {
    const TNode& n = T.nd[v];
    if (n.leaf > 0) return;
    out.push_back(v);
    for (int k : n.kids) dfsInternal(T, k, out);
}

std::string treeKey(const Tree& T, int v) {
    const TNode& n = T.nd[v];
    if (n.leaf > 0) return "L" + std::to_string(n.leaf);
    std::string s = "(";
    for (size_t i = 0; i < n.kids.size(); i++) {
        if (i) s += " ";
        s += treeKey(T, n.kids[i]);
    }
    return s + ")g" + std::to_string(n.kids.size()) + "." + std::to_string(n.deg) + "." +
           std::to_string(n.idx);
}

int treeDeg(const Tree& T) { return subtreeDeg(T, 0); }

/* Sort every vertex's children by least leaf, twisting the vertex label by
 * the recorded transpositions and picking up a Koszul sign per swap from the
 * subtree degrees, then expand the twisted labels over the canonical basis. */
void normalizeTree(Tree T, Q coeff, const SymSeq& A, std::map<std::string, Q>& out,
                   const Ring& R) {
    std::vector<int> verts;
    dfsInternal(T, 0, verts);
    std::vector<std::pair<int, std::vector<int>>> words;  // vertex -> generator word
    for (int v : verts) {
        TNode& n = T.nd[v];
        int b = (int)n.kids.size();
        std::vector<int> mins(b), degs(b), word;
        for (int i = 0; i < b; i++) {
            mins[i] = treeMinLeaf(T, n.kids[i]);
            degs[i] = subtreeDeg(T, n.kids[i]);
        }
        bool moved = true;
        while (moved) {
            moved = false;
            for (int i = 0; i + 1 < b; i++) {
                if (mins[i] > mins[i + 1]) {
                    if ((degs[i] * degs[i + 1]) % 2) coeff = -coeff;
                    std::swap(mins[i], mins[i + 1]);
                    std::swap(degs[i], degs[i + 1]);
                    std::swap(n.kids[i], n.kids[i + 1]);
                    word.push_back(i);
                    moved = true;
                }
            }
        }
        if (!word.empty()) words.push_back({v, std::move(word)});
    }
    std::vector<std::pair<int, std::map<int, Q>>> expand;
    for (auto& [v, word] : words) {
        const TNode& n = T.nd[v];
        int b = (int)n.kids.size();
        std::map<int, Q> vec = {{n.idx, Q(1)}};
        for (int g : word) {
            int dim = A.lev[b].dim(n.deg);
            vec = degAt(A.act[b][g], n.deg, dim, dim).apply(vec, R);
        }
        expand.push_back({v, std::move(vec)});
    }
    std::function<void(size_t, const Q&)> rec = [&](size_t i, const Q& c) {
        if (c == 0) return;
        if (i == expand.size()) {
            Q& slot = out[treeKey(T, 0)];
            slot = R.add(slot, c);
            return;
        }
        for (auto& [row, val] : expand[i].second) {
            T.nd[expand[i].first].idx = row;
            rec(i + 1, R.mul(c, val));
        }
    };
    rec(0, coeff);
}

/* All canonical trees on the given sorted leaf set, with every choice of
 * generator labels. Block partitions are enumerated as restricted growth
 * strings, so blocks arrive ordered by least element. */
void enumShapes(const std::vector<int>& leaves, const SymSeq& A, std::vector<Tree>& out) {
    if (leaves.size() == 1) {
        Tree T;
        T.nd.push_back({leaves[0], 0, 0, {}});
        out.push_back(T);
        return;
    }
    int n = (int)leaves.size();
    std::vector<int> g(n, 0);
    std::function<void(int, int)> rec = [&](int i, int maxb) {
        if (i == n) {
            int b = maxb + 1;
            if (b < 2 || b > A.Rmax || A.lev[b].bas.empty()) return;
            std::vector<std::vector<int>> blocks(b);
            for (int j = 0; j < n; j++) blocks[g[j]].push_back(leaves[j]);
            std::vector<std::vector<Tree>> subs(b);
            for (int j = 0; j < b; j++) {
                enumShapes(blocks[j], A, subs[j]);
                if (subs[j].empty()) return;
            }
            std::vector<int> pick(b, 0);
            while (true) {
                for (auto& [dg, ls] : A.lev[b].bas) {
                    for (int idx = 0; idx < (int)ls.size(); idx++) {
                        Tree T;
                        T.nd.push_back({0, dg, idx, {}});
                        std::vector<int> kids;
                        for (int j = 0; j < b; j++) {
                            int base = (int)T.nd.size();
                            kids.push_back(base);
                            for (TNode m : subs[j][pick[j]].nd) {
                                for (int& kk : m.kids) kk += base;
                                T.nd.push_back(std::move(m));
                            }
                        }
                        T.nd[0].kids = kids;
                        out.push_back(std::move(T));
                    }
                }
                int j = b - 1;
                while (j >= 0 && ++pick[j] == (int)subs[j].size()) pick[j--] = 0;
                if (j < 0) break;
            }
            return;
        }
        for (int v = 0; v <= maxb + 1 && v < n; v++) {
            g[i] = v;
            rec(i + 1, std::max(maxb, v));
        }
    };
    rec(1, 0);
}

/* Substitute U_j for leaf j of T, leaves of U_j shifted into block j. The
 * sign moves each grafted vertex list from the source order (outer tree
 * first, then the inputs left to right) into the new traversal order. */
std::pair<Tree, Q> graftTrees(const Tree& T, const std::vector<const Tree*>& U,
                              const std::vector<int>& off) {
    std::vector<int> vT;
    dfsInternal(T, 0, vT);
    std::map<int, int> posT;
    for (int i = 0; i < (int)vT.size(); i++) posT[vT[i]] = i;
    std::vector<std::map<int, int>> posU(U.size());
    std::vector<int> blockBase(U.size() + 1, (int)vT.size());
    for (size_t j = 0; j < U.size(); j++) {
        std::vector<int> vs;
        dfsInternal(*U[j], 0, vs);
        for (int i = 0; i < (int)vs.size(); i++) posU[j][vs[i]] = i;
        blockBase[j + 1] = blockBase[j] + (int)vs.size();
    }

    Tree G;
    std::vector<int> serial;  // per node of G; -1 for leaves
    std::function<int(int, int)> copyU = [&](int j, int v) -> int {
        const TNode& n = U[j - 1]->nd[v];
        int me = (int)G.nd.size();
        if (n.leaf > 0) {
            G.nd.push_back({n.leaf + off[j - 1], 0, 0, {}});
            serial.push_back(-1);
            return me;
        }
        G.nd.push_back({0, n.deg, n.idx, {}});
        serial.push_back(blockBase[j - 1] + posU[j - 1].at(v));
        std::vector<int> kid;
        for (int k : n.kids) kid.push_back(copyU(j, k));
        G.nd[me].kids = kid;
        return me;
    };
    std::function<int(int)> copyT = [&](int v) -> int {
        const TNode& n = T.nd[v];
        if (n.leaf > 0) return copyU(n.leaf, 0);
        int me = (int)G.nd.size();
        G.nd.push_back({0, n.deg, n.idx, {}});
        serial.push_back(posT.at(v));
        std::vector<int> kid;
        for (int k : n.kids) kid.push_back(copyT(k));
        G.nd[me].kids = kid;
        return me;
    };
    copyT(0);

    std::vector<int> order;
    dfsInternal(G, 0, order);
    long flips = 0;
    for (size_t a = 0; a < order.size(); a++)
        for (size_t b = a + 1; b < order.size(); b++)
            if (serial[order[a]] > serial[order[b]])
                flips += (long)G.nd[order[a]].deg * G.nd[order[b]].deg;
    return {std::move(G), flips % 2 ? Q(-1) : Q(1)};
}

}  // namespace

Operad freeOperad(const SymSeq& gens) {
    const Ring& R = gens.ring;
    gens.validateActions();
    OT_CHECK(gens.Rmax >= 1, "bad-input", "generator sequence needs at least level 1");
    OT_CHECK(gens.lev[0].totalDim() == 0 && gens.lev[1].totalDim() == 0, "bad-input",
             "free operads need generators concentrated in arities >= 2");

    int Rmax = gens.Rmax;
    Operad O;
    O.name = "free";
    O.unitary1 = true;
    O.unitIdx = 0;
    O.seq.ring = R;
    O.seq.Rmax = Rmax;
    O.seq.lev.assign(Rmax + 1, zeroComplex(R));
    O.seq.act.assign(Rmax + 1, {});

    std::vector<std::map<int, std::vector<Tree>>> treesAt(Rmax + 1);
    std::vector<std::map<std::string, std::pair<int, int>>> pos(Rmax + 1);

    for (int r = 1; r <= Rmax; r++) {
        std::vector<int> leaves(r);
        for (int i = 0; i < r; i++) leaves[i] = i + 1;
        std::vector<Tree> all;
        enumShapes(leaves, gens, all);
        ChainComplex& L = O.seq.lev[r];
        for (auto& T : all) treesAt[r][treeDeg(T)].push_back(std::move(T));
        for (auto& [dg, ts] : treesAt[r]) {
            std::vector<std::string> ls;
            for (int i = 0; i < (int)ts.size(); i++) {
                std::string key = treeKey(ts[i], 0);
                pos[r][key] = {dg, i};
                ls.push_back(key);
            }
            L.bas[dg] = ls;
        }
        // differential: one vertex at a time, Leibniz signs from the labels
        // traversed before it
        for (auto& [dg, ts] : treesAt[r]) {
            if (!L.dim(dg - 1)) continue;
            Mat D(L.dim(dg - 1), (int)ts.size());
            for (int i = 0; i < (int)ts.size(); i++) {
                std::vector<int> verts;
                dfsInternal(ts[i], 0, verts);
                int prefix = 0;
                for (int v : verts) {
                    const TNode& n = ts[i].nd[v];
                    int b = (int)n.kids.size();
                    const Mat& dm = gens.lev[b].dmat(n.deg);
                    for (auto& [row, val] : dm.c[n.idx]) {
                        Tree U = ts[i];
                        U.nd[v].deg -= 1;
                        U.nd[v].idx = row;
                        auto [udg, uix] = pos[r].at(treeKey(U, 0));
                        OT_CHECK(udg == dg - 1, "internal", "differential degree drift");
                        D.add(uix, i, prefix % 2 ? R.neg(val) : val, R);
                    }
                    prefix += n.deg;
                }
            }
            if (!D.isZero()) L.setDiff(dg, D);
        }
        // level actions: relabel the leaves, then renormalize
        for (int g = 0; g + 1 < r; g++) {
            DegMap M;
            for (auto& [dg, ts] : treesAt[r]) {
                Mat A((int)ts.size(), (int)ts.size());
                for (int i = 0; i < (int)ts.size(); i++) {
                    Tree U = ts[i];
                    for (auto& n : U.nd) {
                        if (n.leaf == g + 1) n.leaf = g + 2;
                        else if (n.leaf == g + 2) n.leaf = g + 1;
                    }
                    std::map<std::string, Q> img;
                    normalizeTree(std::move(U), Q(1), gens, img, R);
                    for (auto& [key, c] : img) {
                        auto [udg, uix] = pos[r].at(key);
                        OT_CHECK(udg == dg, "internal", "action degree drift");
                        A.add(uix, i, c, R);
                    }
                }
                if (!A.isZero()) M[dg] = std::move(A);
            }
            O.seq.act[r].push_back(std::move(M));
        }
    }

    fillGammaSources(O);
    for (auto& key : gammaKeys(Rmax)) {
        int t = key[0], s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        const TensorComplex& src = O.sourceAt(key);
        if (src.C.bas.empty()) continue;
        std::vector<int> off(t + 1, 0);
        for (int j = 1; j <= t; j++) off[j] = off[j - 1] + key[j];
        DegMap G;
        for (auto& [n, bs] : src.ix.blocks) {
            Mat M(O.seq.lev[s].dim(n), src.C.dim(n));
            for (auto& blk : bs) {
                long sz = 1;
                for (int d : blk.dims) sz *= d;
                for (long p = 0; p < sz; p++) {
                    auto [degs, idxs] = src.ix.at(n, blk.offset + p);
                    const Tree& T = treesAt[t].at(degs[0])[idxs[0]];
                    std::vector<const Tree*> U(t);
                    for (int j = 1; j <= t; j++) U[j - 1] = &treesAt[key[j]].at(degs[j])[idxs[j]];
                    auto [Gt, sign] = graftTrees(T, U, off);
                    std::map<std::string, Q> img;
                    normalizeTree(std::move(Gt), sign, gens, img, R);
                    for (auto& [kk, c] : img) {
                        auto [udg, uix] = pos[s].at(kk);
                        OT_CHECK(udg == n, "internal", "composition degree drift");
                        M.add(uix, (int)(blk.offset + p), c, R);
                    }
                }
            }
            if (!M.isZero()) G[n] = std::move(M);
        }
        if (!degIsZero(G)) O.gam[key] = std::move(G);
    }
    return O;
}

Operad truncationOperad(const Operad& O, int k) {
    OT_CHECK(k >= 1 && k <= O.Rmax(), "bad-input", "truncation level out of range");
    Operad T;
    T.name = O.name + "-tr" + std::to_string(k);
    T.unitIdx = O.unitIdx;
    T.unitary1 = O.unitary1;
    T.sigmaFree = O.sigmaFree;
    T.seq = truncateSeq(O.seq, k);
    for (auto& [key, g] : O.gam) {
        int s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        if (s <= k) T.gam[key] = g;
    }
    fillGammaSources(T);
    return T;
}

Thickened thickenedOperad(std::shared_ptr<const Operad> base) {
    OT_CHECK(base != nullptr, "bad-input", "no operad to thicken");
    const Ring& R = base->ring();
    int Rmax = base->Rmax();

    ChainComplex E;
    E.ring = R;
    E.bas[0] = {"1"};
    E.bas[1] = {"y"};
    E.bas[2] = {"x"};
    {
        Mat d(1, 1);
        d.set(0, 0, Q(1));
        E.setDiff(2, d);
    }
    E.validate();

    auto O = std::make_shared<Operad>();
    O->name = base->name + "-thick";
    O->unitary1 = false;
    O->sigmaFree = base->sigmaFree;
    O->seq.ring = R;
    O->seq.Rmax = Rmax;
    O->seq.lev.assign(Rmax + 1, zeroComplex(R));
    O->seq.act.assign(Rmax + 1, {});

    std::vector<TensorComplex> tlev(Rmax + 1);
    for (int r = 1; r <= Rmax; r++) {
        const ChainComplex& B = base->level(r);
        if (B.bas.empty()) {
            O->seq.act[r].assign(std::max(0, r - 1), DegMap{});
            continue;
        }
        tlev[r] = tensorMany({&B, &E}, B.lowDegree(), B.topDegree() + 2);
        O->seq.lev[r] = tlev[r].C;
        for (int g = 0; g + 1 < r; g++)
            O->seq.act[r].push_back(
                applyOnFactors(tlev[r], 0, 0, base->seq.act[r][g], wrapOne(B), B, tlev[r], R));
    }
    OT_CHECK(!base->level(1).bas.empty(), "bad-input", "thickening needs a level 1");
    O->unitIdx = (int)tlev[1].ix.indexOf(0, {0, 0}, {base->unitIdx, 0});
    fillGammaSources(*O);

    // gamma lands the lone non unit E letter, with the Koszul sign of
    // carrying it past the base entries to its right
    for (auto& key : gammaKeys(Rmax)) {
        auto git = base->gam.find(key);
        if (git == base->gam.end()) continue;
        const DegMap& gbase = git->second;
        int t = key[0], s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        const TensorComplex& src = O->sourceAt(key);
        if (src.C.bas.empty()) continue;
        const TensorComplex& bsrc = base->sourceAt(key);
        DegMap G;
        for (auto& [n, bs] : src.ix.blocks) {
            Mat M(O->seq.lev[s].dim(n), src.C.dim(n));
            for (auto& blk : bs) {
                long sz = 1;
                for (int d : blk.dims) sz *= d;
                for (long p = 0; p < sz; p++) {
                    auto [degs, idxs] = src.ix.at(n, blk.offset + p);
                    std::vector<int> bdeg(t + 1), bidx(t + 1);
                    int J = -1, edegJ = 0, eidxJ = 0, nb = 0;
                    bool dead = false;
                    for (int j = 0; j <= t; j++) {
                        int rj = (j == 0) ? t : key[j];
                        auto [dd, ii] = tlev[rj].ix.at(degs[j], idxs[j]);
                        bdeg[j] = dd[0];
                        bidx[j] = ii[0];
                        nb += dd[0];
                        if (dd[1] > 0) {
                            if (J >= 0) {
                                dead = true;
                                break;
                            }
                            J = j;
                            edegJ = dd[1];
                            eidxJ = ii[1];
                        }
                    }
                    if (dead) continue;
                    auto bit = gbase.find(nb);
                    if (bit == gbase.end()) continue;
                    int tail = 0;
                    if (J >= 0)
                        for (int l = J + 1; l <= t; l++) tail += bdeg[l];
                    Q sign = (J >= 0 && (edegJ * tail) % 2) ? Q(-1) : Q(1);
                    long pb = bsrc.ix.indexOf(nb, bdeg, bidx);
                    for (auto& [row, val] : bit->second.c[pb]) {
                        long tp = tlev[s].ix.indexOf(n, {nb, edegJ}, {row, eidxJ});
                        M.add((int)tp, (int)(blk.offset + p), R.mul(val, sign), R);
                    }
                }
            }
            if (!M.isZero()) G[n] = std::move(M);
        }
        if (!degIsZero(G)) O->gam[key] = std::move(G);
    }

    Thickened out;
    out.op = O;
    out.aug.from = O;
    out.aug.to = base;
    out.aug.name = O->name + "-aug";
    out.aug.psi.assign(Rmax + 1, DegMap{});
    for (int r = 1; r <= Rmax; r++) {
        const ChainComplex& B = base->level(r);
        if (B.bas.empty()) continue;
        DegMap psi;
        for (auto& [n, bs] : tlev[r].ix.blocks) {
            Mat M(B.dim(n), O->seq.lev[r].dim(n));
            for (auto& blk : bs) {
                if (blk.deg[1] != 0) continue;
                for (int i = 0; i < blk.dims[0]; i++) M.set(i, (int)(blk.offset + i), Q(1));
            }
            if (!M.isZero()) psi[n] = std::move(M);
        }
        out.aug.psi[r] = std::move(psi);
    }
    return out;
}

void checkOperadMap(const OperadMap& m) {
    OT_CHECK(m.from && m.to, "bad-input", "operad map with missing ends");
    const Operad& A = *m.from;
    const Operad& B = *m.to;
    OT_CHECK(A.ring() == B.ring(), "wrong-ring", "operad map across mismatched rings");
    OT_CHECK(A.Rmax() == B.Rmax(), "bad-input", "operad map across mismatched level ranges");
    OT_CHECK((int)m.psi.size() == A.Rmax() + 1, "bad-input",
             "operad map needs one entry per level");
    const Ring& R = A.ring();

    for (int r = 0; r <= A.Rmax(); r++) {
        checkChainMap(A.level(r), B.level(r), m.psi[r]);
        for (int g = 0; g + 1 < r; g++) {
            DegMap lhs = degCompose(A.seq.act[r][g], m.psi[r], R);
            DegMap rhs = degCompose(m.psi[r], B.seq.act[r][g], R);
            OT_CHECK(degEqual(lhs, rhs), "operad-map",
                     "level map breaks equivariance at level " + std::to_string(r));
        }
    }
    {
        Mat p1 = degAt(m.psi[1], 0, B.level(1).dim(0), A.level(1).dim(0));
        auto col = p1.c[A.unitIdx];
        bool ok = col.size() == 1 && col.count(B.unitIdx) && col.at(B.unitIdx) == 1;
        OT_CHECK(ok, "operad-map", "level map does not carry the unit to the unit");
    }
    for (auto& key : gammaKeys(A.Rmax())) {
        int s = 0;
        for (size_t i = 1; i < key.size(); i++) s += key[i];
        const TensorComplex& srcA = A.sourceAt(key);
        const TensorComplex& srcB = B.sourceAt(key);
        std::vector<const ChainComplex*> facA = {&A.level(key[0])};
        std::vector<const ChainComplex*> facB = {&B.level(key[0])};
        std::vector<const DegMap*> maps = {&m.psi[key[0]]};
        for (size_t i = 1; i < key.size(); i++) {
            facA.push_back(&A.level(key[i]));
            facB.push_back(&B.level(key[i]));
            maps.push_back(&m.psi[key[i]]);
        }
        DegMap lift = applyPerFactor(facA, facB, maps, srcA, srcB, R);
        DegMap lhs = degCompose(A.gammaAt(key), m.psi[s], R);
        DegMap rhs = degCompose(lift, B.gammaAt(key), R);
        OT_CHECK(degEqual(lhs, rhs), "operad-map",
                 "level map breaks composition at " + keyStr(key));
    }
}

OperadMap truncationMap(std::shared_ptr<const Operad> from, std::shared_ptr<const Operad> to) {
    OT_CHECK(from && to, "bad-input", "truncation map with missing ends");
    OT_CHECK(from->Rmax() == to->Rmax(), "bad-input",
             "truncation map across mismatched level ranges");
    OperadMap m;
    m.from = from;
    m.to = to;
    m.name = from->name + "->" + to->name;
    m.psi.resize(from->Rmax() + 1);
    for (int r = 0; r <= from->Rmax(); r++) {
        const ChainComplex& A = from->level(r);
        const ChainComplex& B = to->level(r);
        if (B.totalDim() == 0) continue;
        OT_CHECK(B.totalDim() == A.totalDim(), "bad-input",
                 "target level " + std::to_string(r) + " is not a truncation level");
        m.psi[r] = degIdentity(A);
    }
    checkOperadMap(m);
    return m;
}

namespace {

void checkSeedDegrees(const ChainComplex& X) {
    X.validate();
    for (auto& [n, ls] : X.bas)
        OT_CHECK(ls.empty() || n >= 1, "unsupported-derived-context",
                 "carriers must vanish in degrees <= 0");
}

/* The arity 1 action of a trivial algebra: pair the unit off against the
 * carrier. */
DegMap unitPairing(const Operad& O, const ChainComplex& X, const TensorComplex& amb) {
    DegMap a;
    for (auto& [n, ls] : X.bas) {
        if (ls.empty()) continue;
        Mat M((int)ls.size(), amb.C.dim(n));
        for (int xi = 0; xi < (int)ls.size(); xi++)
            M.set(xi, (int)amb.ix.indexOf(n, {0, n}, {O.unitIdx, xi}), Q(1));
        a[n] = std::move(M);
    }
    return a;
}

TensorComplex ambientTensor(const Operad& O, const ChainComplex& X, int t) {
    std::vector<const ChainComplex*> fac = {&O.level(t)};
    for (int i = 0; i < t; i++) fac.push_back(&X);
    return manySource(fac);
}

DegMap actionOf(const Algebra& A, int t, const TensorComplex& amb) {
    if (A.kind == AlgKind::Table) {
        auto it = A.tableAct.find(t);
        return it == A.tableAct.end() ? DegMap{} : it->second;
    }
    if (A.kind == AlgKind::Trivial && t == 1) return unitPairing(*A.op, A.seed, amb);
    return {};
}

}  // namespace

Algebra freeAlgebra(std::shared_ptr<const Operad> O, const ChainComplex& V,
                    const std::string& name) {
    OT_CHECK(O != nullptr, "bad-input", "algebra without an operad");
    OT_CHECK(V.ring == O->ring(), "wrong-ring", "seed ring does not match the operad");
    checkSeedDegrees(V);
    Algebra A;
    A.op = O;
    A.kind = AlgKind::Free;
    A.seed = V;
    A.name = name;
    return A;
}

Algebra trivialAlgebra(std::shared_ptr<const Operad> O, const ChainComplex& X,
                       const std::string& name) {
    OT_CHECK(O != nullptr, "bad-input", "algebra without an operad");
    OT_CHECK(X.ring == O->ring(), "wrong-ring", "carrier ring does not match the operad");
    OT_CHECK(O->unitary1, "unsupported-derived-context",
             "trivial algebras need a unitary level 1");
    checkSeedDegrees(X);
    Algebra A;
    A.op = O;
    A.kind = AlgKind::Trivial;
    A.seed = X;
    A.name = name;
    return A;
}

Algebra tableAlgebra(std::shared_ptr<const Operad> O, const ChainComplex& X,
                     std::map<int, DegMap> act, const std::string& name) {
    OT_CHECK(O != nullptr, "bad-input", "algebra without an operad");
    OT_CHECK(X.ring == O->ring(), "wrong-ring", "carrier ring does not match the operad");
    Algebra A;
    A.op = O;
    A.kind = AlgKind::Table;
    A.seed = X;
    A.tableAct = std::move(act);
    A.name = name;
    checkAlgebra(A);
    return A;
}

void checkAlgebra(const Algebra& A) {
    OT_CHECK(A.op != nullptr, "bad-input", "algebra without an operad");
    const Operad& O = *A.op;
    const Ring& R = O.ring();
    checkSeedDegrees(A.seed);
    if (A.kind == AlgKind::Free) return;
    if (A.kind == AlgKind::Trivial) {
        OT_CHECK(O.unitary1, "unsupported-derived-context",
                 "trivial algebras need a unitary level 1");
        return;
    }
    const ChainComplex& X = A.seed;
    OT_CHECK(A.tableAct.count(1), "bad-input", "table algebras need the arity 1 action");

    std::vector<TensorComplex> amb(O.Rmax() + 1);
    for (int t = 1; t <= O.Rmax(); t++) amb[t] = ambientTensor(O, X, t);

    for (auto& [t, al] : A.tableAct) {
        OT_CHECK(t >= 1 && t <= O.Rmax(), "bad-input", "action arity out of range");
        checkChainMap(amb[t].C, X, al);
        for (int g = 0; g + 1 < t; g++) {
            DegMap a0 = applyOnFactors(amb[t], 0, 0, O.seq.act[t][g], wrapOne(O.level(t)),
                                       O.level(t), amb[t], R);
            std::vector<int> srcOf(t + 1);
            for (int i = 0; i <= t; i++) srcOf[i] = i;
            std::swap(srcOf[1 + g], srcOf[2 + g]);
            DegMap sw = tensorFactorPermute(amb[t], amb[t], srcOf, R);
            OT_CHECK(degEqual(degCompose(a0, al, R), degCompose(sw, al, R)), "bad-input",
                     "action fails to descend to coinvariants at arity " + std::to_string(t));
        }
    }
    {
        const DegMap& a1 = A.tableAct.at(1);
        for (auto& [n, ls] : X.bas) {
            for (int xi = 0; xi < (int)ls.size(); xi++) {
                long p = amb[1].ix.indexOf(n, {0, n}, {O.unitIdx, xi});
                std::map<int, Q> col;
                auto it = a1.find(n);
                if (it != a1.end()) col = it->second.c[p];
                bool ok = col.size() == 1 && col.count(xi) && col.at(xi) == 1;
                OT_CHECK(ok, "bad-input", "unit acts by something other than the identity");
            }
        }
    }
    // associativity of the action over every composable shape
    for (int t = 1; t <= O.Rmax(); t++) {
        if (O.level(t).bas.empty()) continue;
        comps(t, O.Rmax(), [&](const std::vector<int>& sj) {
            int s = 0;
            for (int v : sj) s += v;
            std::vector<const ChainComplex*> allFac = {&O.level(t)};
            for (int v : sj) allFac.push_back(&O.level(v));
            for (int i = 0; i < s; i++) allFac.push_back(&X);
            for (auto* f : allFac)
                if (f->bas.empty()) return;
            TensorComplex Tall = manySource(allFac);
            if (Tall.C.bas.empty()) return;

            std::vector<int> keyV = {t};
            keyV.insert(keyV.end(), sj.begin(), sj.end());
            DegMap M1 = applyOnFactors(Tall, 0, t, O.gammaAt(keyV), O.sourceAt(keyV),
                                       O.level(s), amb[s], R);
            DegMap lhs = degCompose(M1, actionOf(A, s, amb[s]), R);

            std::vector<int> srcOf = {0};
            std::vector<const ChainComplex*> intFac = {&O.level(t)};
            int upos = 0;
            for (int j = 0; j < t; j++) {
                srcOf.push_back(1 + j);
                intFac.push_back(&O.level(sj[j]));
                for (int a = 0; a < sj[j]; a++) {
                    srcOf.push_back(1 + t + upos);
                    intFac.push_back(&X);
                    upos++;
                }
            }
            TensorComplex Tint = manySource(intFac);
            DegMap rhs = tensorFactorPermute(Tall, Tint, srcOf, R);

            const TensorComplex* cur = &Tint;
            TensorComplex held;
            std::vector<const ChainComplex*> curFac = intFac;
            for (int j = 0; j < t; j++) {
                int lo = 1 + j, hiF = 1 + j + sj[j];
                std::vector<const ChainComplex*> nextFac(curFac.begin(), curFac.begin() + lo);
                nextFac.push_back(&X);
                nextFac.insert(nextFac.end(), curFac.begin() + hiF + 1, curFac.end());
                bool last = (j == t - 1);
                TensorComplex next;
                const TensorComplex* tgt;
                if (last) {
                    tgt = &amb[t];
                } else {
                    next = manySource(nextFac);
                    tgt = &next;
                }
                DegMap inner = actionOf(A, sj[j], amb[sj[j]]);
                DegMap step = applyOnFactors(*cur, lo, hiF, inner, amb[sj[j]], X, *tgt, R);
                rhs = degCompose(rhs, step, R);
                curFac = std::move(nextFac);
                if (!last) {
                    held = std::move(next);
                    cur = &held;
                }
            }
            rhs = degCompose(rhs, actionOf(A, t, amb[t]), R);
            OT_CHECK(degEqual(lhs, rhs), "bad-input",
                     "action associativity fails at " + keyStr(keyV));
        });
    }
}

Algebra restrictAlgebra(const OperadMap& psi, const Algebra& A) {
    OT_CHECK(psi.from && psi.to, "bad-input", "operad map with missing ends");
    OT_CHECK(A.op.get() == psi.to.get(), "bad-input",
             "algebra lives over a different operad than the map targets");
    OT_CHECK(A.kind != AlgKind::Free, "unsupported-derived-context",
             "free carriers do not restrict to tables");
    const Operad& P = *psi.from;
    const Operad& O = *psi.to;
    const Ring& R = O.ring();
    const ChainComplex& X = A.seed;

    Algebra B;
    B.op = psi.from;
    B.kind = AlgKind::Table;
    B.seed = X;
    B.name = A.name + "-along-" + (psi.name.empty() ? "psi" : psi.name);

    OT_CHECK((int)psi.psi.size() == P.Rmax() + 1, "bad-input",
             "operad map needs one entry per level");
    for (int t = 1; t <= P.Rmax(); t++) {
        if (P.level(t).bas.empty() || O.level(t).bas.empty()) continue;
        TensorComplex ambO = ambientTensor(O, X, t);
        DegMap base = actionOf(A, t, ambO);
        if (degIsZero(base)) continue;
        TensorComplex ambP = ambientTensor(P, X, t);
        DegMap lift = applyOnFactors(ambP, 0, 0, psi.psi[t], wrapOne(P.level(t)),
                                     O.level(t), ambO, R);
        DegMap a = degCompose(lift, base, R);
        if (!degIsZero(a)) B.tableAct[t] = std::move(a);
    }
    checkAlgebra(B);
    return B;
}

void checkAlgebraMap(const AlgebraMap& m) {
    OT_CHECK(m.from.op != nullptr && m.from.op.get() == m.to.op.get(), "bad-input",
             "algebra map across different operads");
    const Operad& O = *m.from.op;
    const Ring& R = O.ring();
    if (m.kind == AMapKind::Seed) {
        OT_CHECK(m.from.kind == AlgKind::Free && m.to.kind == AlgKind::Free, "bad-input",
                 "seed maps need free algebras on both sides");
        checkChainMap(m.from.seed, m.to.seed, m.f);
        return;
    }
    OT_CHECK(m.from.kind != AlgKind::Free && m.to.kind != AlgKind::Free, "bad-input",
             "carrier maps need tabled actions on both sides");
    checkChainMap(m.from.seed, m.to.seed, m.f);

    DegMap idO;
    for (int t = 1; t <= O.Rmax(); t++) {
        if (O.level(t).bas.empty()) continue;
        TensorComplex ambF = ambientTensor(O, m.from.seed, t);
        TensorComplex ambT = ambientTensor(O, m.to.seed, t);
        DegMap fromAct = actionOf(m.from, t, ambF);
        DegMap toAct = actionOf(m.to, t, ambT);
        if (degIsZero(fromAct) && degIsZero(toAct)) continue;

        idO = degIdentity(O.level(t));
        std::vector<const ChainComplex*> facF = {&O.level(t)};
        std::vector<const ChainComplex*> facT = {&O.level(t)};
        std::vector<const DegMap*> maps = {&idO};
        for (int i = 0; i < t; i++) {
            facF.push_back(&m.from.seed);
            facT.push_back(&m.to.seed);
            maps.push_back(&m.f);
        }
        DegMap lift = applyPerFactor(facF, facT, maps, ambF, ambT, R);
        DegMap lhs = degCompose(fromAct, m.f, R);
        DegMap rhs = degCompose(lift, toAct, R);
        OT_CHECK(degEqual(lhs, rhs), "bad-input",
                 "algebra map fails to respect the action at arity " + std::to_string(t));
    }
}

}  // namespace ot
