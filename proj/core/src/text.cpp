#include "stallpred/text.hpp"

#include <charconv>

namespace stallpred {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace stallpred
