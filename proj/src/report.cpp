#include "vowelrec/report.hpp"

#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "vowelrec/error.hpp"

namespace vowelrec {

std::string features_csv(const std::vector<FeatureSequence>& sequences) {
    const std::size_t dim = sequences.empty() ? 0 : sequences.front().dim();
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "clip_id,label,frame_idx");
    for (std::size_t d = 1; d <= dim; ++d) fmt::format_to(std::back_inserter(out), ",c{}", d);
    out.push_back('\n');
    for (const auto& seq : sequences) {
        for (std::size_t t = 0; t < seq.frames.size(); ++t) {
            fmt::format_to(std::back_inserter(out), "{},{},{}", seq.clip_id, seq.label.value_or(""), t);
            for (double v : seq.frames[t]) fmt::format_to(std::back_inserter(out), ",{:.17g}", v);
            out.push_back('\n');
        }
    }
    return fmt::to_string(out);
}

std::string fratio_csv(const FRatioReport& report) {
    std::vector<std::size_t> rank(report.f.size());
    for (std::size_t r = 0; r < report.ranking.size(); ++r) rank[report.ranking[r]] = r + 1;
    std::string out = "coefficient,f_ratio,rank\n";
    for (std::size_t d = 0; d < report.f.size(); ++d) out += fmt::format("{},{:.10g},{}\n", d + 1, report.f[d], rank[d]);
    return out;
}

std::string subset_summary(const FRatioReport& report, std::size_t k) {
    const auto subset = select_top_k(report, k);
    return fmt::format("top-{} coefficients by F-ratio: {}\n", k, fmt::join(subset.indices, " "));
}

std::string sweep_csv(const SweepReport& report) {
    std::string out = "k,mean_accuracy,std_accuracy,n_iterations\n";
    for (const auto& e : report.entries)
        out += fmt::format("{},{:.6f},{:.6f},{}\n", e.k, e.mean_accuracy, e.std_accuracy, report.n_iterations);
    return out;
}

std::string sweep_iterations_csv(const SweepReport& report) {
    std::string out = "k,iteration,accuracy,subset\n";
    for (const auto& e : report.entries)
        for (std::size_t it = 0; it < e.accuracies.size(); ++it)
            out += fmt::format("{},{},{:.6f},{}\n", e.k, it, e.accuracies[it], fmt::join(e.subsets[it].indices, " "));
    return out;
}

std::string confusion_csv(const SweepReport& report) {
    std::string out = "k,actual,predicted,count\n";
    for (const auto& e : report.entries)
        for (std::size_t a = 0; a < e.confusion.size(); ++a)
            for (std::size_t p = 0; p < e.confusion.size(); ++p)
                out += fmt::format("{},{},{},{}\n", e.k, report.classes[a], report.classes[p], e.confusion.at(a, p));
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw Error(ErrorKind::Io, fmt::format("write to '{}' failed", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace vowelrec
