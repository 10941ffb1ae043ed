#include "dynamo/common.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dynamo {

cplx sqrt_re_pos(cplx z)
{
    cplx s = std::sqrt(z);
    if (s.real() < 0.0) s = -s;
    if (s.real() == 0.0 && s.imag() < 0.0) s = -s;
    return s;
}

cplx root4_re_pos(cplx z)
{
    cplx s = std::pow(z, 0.25);
    // principal root already has |arg| <= pi/4; only the tie needs care
    if (s.real() < 0.0) s = -s;
    if (s.real() == 0.0 && s.imag() < 0.0) s = -s;
    return s;
}

Jet operator+(const Jet& a, const Jet& b)
{
    Jet r;
    for (int k = 0; k < 4; ++k) r.d[k] = a.d[k] + b.d[k];
    return r;
}

Jet operator-(const Jet& a, const Jet& b)
{
    Jet r;
    for (int k = 0; k < 4; ++k) r.d[k] = a.d[k] - b.d[k];
    return r;
}

Jet operator-(const Jet& a)
{
    Jet r;
    for (int k = 0; k < 4; ++k) r.d[k] = -a.d[k];
    return r;
}

Jet operator*(const Jet& a, const Jet& b)
{
    Jet r;
    r.d[0] = a.d[0] * b.d[0];
    r.d[1] = a.d[1] * b.d[0] + a.d[0] * b.d[1];
    r.d[2] = a.d[2] * b.d[0] + 2.0 * a.d[1] * b.d[1] + a.d[0] * b.d[2];
    r.d[3] = a.d[3] * b.d[0] + 3.0 * a.d[2] * b.d[1] + 3.0 * a.d[1] * b.d[2] + a.d[0] * b.d[3];
    return r;
}

Jet operator/(const Jet& a, const Jet& b)
{
    // reciprocal from b*h = 1 by Leibniz, then multiply
    Jet h;
    const double f0 = b.d[0];
    h.d[0] = 1.0 / f0;
    h.d[1] = -(b.d[1] * h.d[0]) / f0;
    h.d[2] = -(b.d[2] * h.d[0] + 2.0 * b.d[1] * h.d[1]) / f0;
    h.d[3] = -(b.d[3] * h.d[0] + 3.0 * b.d[2] * h.d[1] + 3.0 * b.d[1] * h.d[2]) / f0;
    return a * h;
}

Jet exp(const Jet& a)
{
    Jet g;
    g.d[0] = std::exp(a.d[0]);
    g.d[1] = a.d[1] * g.d[0];
    g.d[2] = a.d[2] * g.d[0] + a.d[1] * g.d[1];
    g.d[3] = a.d[3] * g.d[0] + 2.0 * a.d[2] * g.d[1] + a.d[1] * g.d[2];
    return g;
}

Jet log(const Jet& a)
{
    // g' = a'/a, then differentiate the quotient
    Jet da;
    da.d[0] = a.d[1];
    da.d[1] = a.d[2];
    da.d[2] = a.d[3];
    Jet q = da / a;
    Jet g;
    g.d[0] = std::log(a.d[0]);
    g.d[1] = q.d[0];
    g.d[2] = q.d[1];
    g.d[3] = q.d[2];
    return g;
}

void parallel_for(size_t n, const std::function<void(size_t)>& body, unsigned workers)
{
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<size_t>(workers, n));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first) first = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace dynamo
