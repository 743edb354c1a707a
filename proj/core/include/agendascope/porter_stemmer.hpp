#pragma once

#include <string>
#include <string_view>

namespace agendascope {

// Porter (1980) suffix-stripping stemmer, following the reference C
// implementation by M. F. Porter (including its "logi" and "bli" rules).
// Input is expected to be a lowercase word; words of length <= 2 are
// returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace agendascope
