#include "gridmetric/grid.hpp"

#include <cstdio>
#include <stdexcept>

namespace gridmetric {

namespace {

struct File {
    std::FILE* f;
    explicit File(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
    }
    ~File() {
        if (f) std::fclose(f);
    }
};

}  // namespace

void DistanceField::write_csv(const std::string& path) const {
    File out(path);
    std::fprintf(out.f, "x,y,dist\n");
    for (size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] == kInfWeight) continue;
        GridPoint p = point_at(i);
        std::fprintf(out.f, "%lld,%lld,%.17g\n", static_cast<long long>(p.x),
                     static_cast<long long>(p.y), dist[i]);
    }
}

void DistanceField::write_jsonl(const std::string& path) const {
    File out(path);
    for (size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] == kInfWeight) continue;
        GridPoint p = point_at(i);
        std::fprintf(out.f, "{\"x\":%lld,\"y\":%lld,\"dist\":%.17g}\n",
                     static_cast<long long>(p.x), static_cast<long long>(p.y), dist[i]);
    }
}

void write_trace_csv(const std::string& path, const std::vector<GridPoint>& trace) {
    File out(path);
    std::fprintf(out.f, "x,y\n");
    for (auto& p : trace)
        std::fprintf(out.f, "%lld,%lld\n", static_cast<long long>(p.x),
                     static_cast<long long>(p.y));
}

void write_trace_jsonl(const std::string& path, const std::vector<GridPoint>& trace) {
    File out(path);
    for (auto& p : trace)
        std::fprintf(out.f, "{\"x\":%lld,\"y\":%lld}\n", static_cast<long long>(p.x),
                     static_cast<long long>(p.y));
}

}  // namespace gridmetric
