#include "czvar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "czvar/common.hpp"

namespace czvar {

SymEigen jacobi_eigen(const Mat& a_in) {
    const int n = int(a_in.rows());
    if (a_in.cols() != n) throw InvalidArgument("jacobi_eigen needs a square matrix");
    Mat a = (a_in + a_in.transpose()) / 2;
    Mat v = Mat::Identity(n, n);
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-17 * scale) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
    SymEigen out{Vec(n), Mat(n, n)};
    for (int i = 0; i < n; ++i) {
        out.values(i) = a(order[i], order[i]);
        out.vectors.col(i) = v.col(order[i]);
    }
    return out;
}

Mat spectral_power(const SymEigen& e, double s) {
    const int n = int(e.values.size());
    if (s == 0) return Mat::Identity(n, n);
    Vec d(n);
    for (int i = 0; i < n; ++i) {
        if (!(e.values(i) > 0)) throw InvalidWeight("matrix is not positive definite");
        d(i) = s == 1 ? e.values(i) : std::pow(e.values(i), s);
    }
    return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

double operator_norm(const Mat& a) {
    if (a.size() == 0) return 0;
    const Mat ata = a.transpose() * a;
    return std::sqrt(std::max(0.0, jacobi_eigen(ata).values.maxCoeff()));
}

Mat range_basis(const Mat& gram, double rel_tol) {
    const SymEigen e = jacobi_eigen(gram);
    const int n = int(gram.rows());
    const double top = n ? e.values.maxCoeff() : 0;
    std::vector<int> keep;
    for (int i = n - 1; i >= 0; --i)
        if (top > 0 && e.values(i) > rel_tol * top) keep.push_back(i);
    Mat b(n, int(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) b.col(int(k)) = e.vectors.col(keep[k]);
    return b;
}

}  // namespace czvar
