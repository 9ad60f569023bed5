#include "macromc/error.hpp"

#include <sstream>

namespace macromc {

namespace {

std::string describe_bounds(const std::string& what, double value, double lower, double upper)
{
    std::ostringstream os;
    os.precision(17);
    os << what << ": value " << value << " outside admissible interval [" << lower << ", " << upper << "]";
    return os.str();
}

std::string describe_line(const std::string& what, std::size_t line)
{
    if (line == 0) {
        return what;
    }
    return "line " + std::to_string(line) + ": " + what;
}

} // namespace

BoundsError::BoundsError(const std::string& what, double value, double lower, double upper)
    : DomainError(describe_bounds(what, value, lower, upper)), value_(value), lower_(lower), upper_(upper)
{
}

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(describe_line(what, line)), line_(line)
{
}

} // namespace macromc
