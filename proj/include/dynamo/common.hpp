#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace dynamo {

using cplx = std::complex<double>;
inline constexpr cplx I_UNIT{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

// Error categories map onto CLI exit codes (config -> 1, everything numerical -> 2).
enum class ErrorKind { Config, Degenerate, Domain, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Square root on the branch Re > 0; a purely imaginary root is sent to Im > 0.
cplx sqrt_re_pos(cplx z);
// Fourth root with Re > 0 (ties toward Im > 0), used for c2^{1/4}.
cplx root4_re_pos(cplx z);

// Value plus first three derivatives, propagated through arithmetic.
// Lets each velocity preset be written once and still expose exact Ω', Ω'', Ω'''.
struct Jet {
    std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};

    Jet() = default;
    Jet(double v) { d[0] = v; }
    static Jet variable(double x) {
        Jet j(x);
        j.d[1] = 1.0;
        return j;
    }
    double operator[](int k) const { return d[k]; }
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet exp(const Jet& a);
Jet log(const Jet& a);

// Runs body(i) for every i in [0, n) on a bounded pool of threads (0 = hardware concurrency).
// Callers write results into per-index slots, so reductions stay in a fixed order.
void parallel_for(size_t n, const std::function<void(size_t)>& body, unsigned workers = 0);

}  // namespace dynamo
