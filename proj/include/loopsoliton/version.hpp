#ifndef LOOPSOLITON_VERSION_HPP
#define LOOPSOLITON_VERSION_HPP

namespace loopsoliton {

inline constexpr const char* kVersion = "1.0.0";

}

#endif
