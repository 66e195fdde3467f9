#include "wvlab/core/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace wvlab::fft {
namespace {

struct PlanKey {
    int n;
    int howmany;
    int stride;
    int dist;
    int sign;

    auto tie() const { return std::tie(n, howmany, stride, dist, sign); }
    bool operator<(const PlanKey& o) const { return tie() < o.tie(); }
};

// fftw_plan_* is not thread safe; fftw_execute_dft on a cached plan is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(const PlanKey& key) {
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const std::size_t extent =
            static_cast<std::size_t>(key.howmany - 1) * key.dist +
            static_cast<std::size_t>(key.n - 1) * key.stride + 1;
        auto* buf = fftw_alloc_complex(extent);
        int n = key.n;
        fftw_plan plan = fftw_plan_many_dft(1, &n, key.howmany, buf, nullptr, key.stride,
                                            key.dist, buf, nullptr, key.stride, key.dist,
                                            key.sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

int sign_of(Direction dir) { return dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD; }

void run(cplx* data, int n, int howmany, int stride, int dist, Direction dir) {
    if (n == 0 || howmany == 0) return;
    fftw_plan plan = cache().get({n, howmany, stride, dist, sign_of(dir)});
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

}  // namespace

void transform(std::span<cplx> data, Direction dir) {
    run(data.data(), static_cast<int>(data.size()), 1, 1, 0, dir);
}

void transform_columns(Eigen::MatrixXcd& m, Direction dir) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    run(m.data(), rows, cols, 1, rows, dir);
}

void transform_rows(Eigen::MatrixXcd& m, Direction dir) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    run(m.data(), cols, rows, rows, 1, dir);
}

}  // namespace wvlab::fft
