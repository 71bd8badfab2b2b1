#ifndef ADSRNOTE_IO_WAV_HPP
#define ADSRNOTE_IO_WAV_HPP

#include <string>

#include "adsrnote/features.hpp"

namespace adsrnote {

// 16-bit PCM WAV only. Multi-channel input is downmixed by averaging.
// Samples are scaled to [-1, 1) (divided by 32768). Parse errors name the
// byte offset.
AudioBuffer read_wav(const std::string& path);

// Writes mono 16-bit PCM; samples are clipped to [-1, 1].
void write_wav(const std::string& path, const AudioBuffer& audio);

}  // namespace adsrnote

#endif  // ADSRNOTE_IO_WAV_HPP
