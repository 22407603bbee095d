#pragma once

#include <chatterbox/conversation.hpp>
#include <chatterbox/platform.hpp>

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chatterbox::caption {

/// Instruction sent with every image or video frame.
extern const char* const kVisionPrompt;
/// Instruction sent with every audio clip.
extern const char* const kSpeechPrompt;

struct CaptionRequest {
  MediaKind kind = MediaKind::image;
  // Asset reference; for video this is the first frame.
  std::string reference;
  std::string prompt;
};

/// Vision or speech model adapter. Throws CaptionUnavailable on failure.
class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string describe(const CaptionRequest& req) = 0;
};

/// Table-driven captioner keyed by asset reference. Unknown assets fail.
class StubCaptioner final : public Captioner {
 public:
  StubCaptioner() = default;
  explicit StubCaptioner(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  void set(const std::string& reference, std::string caption) { table_[reference] = std::move(caption); }

  std::string describe(const CaptionRequest& req) override;

  const std::vector<CaptionRequest>& requests() const { return requests_; }

 private:
  std::map<std::string, std::string> table_;
  std::vector<CaptionRequest> requests_;
};

/// POSTs {kind, reference, prompt} as JSON and reads {"caption": ...}.
class HttpCaptioner final : public Captioner {
 public:
  explicit HttpCaptioner(std::string url);
  std::string describe(const CaptionRequest& req) override;

 private:
  std::string url_;
};

std::string image_marker(const std::string& caption);
std::string audio_marker(const std::string& transcript);
std::string marker_for(MediaKind kind, const std::string& caption);

/// Marker used when the captioner could not describe the media.
std::string placeholder_marker(MediaKind kind);

/// Recovers (kind, caption) from a marker. Images and videos both come back
/// as image since they share a marker.
std::optional<std::pair<MediaKind, std::string>> parse_marker(std::string_view marker);

/// Every marker embedded in free text, in order of appearance.
std::vector<std::pair<MediaKind, std::string>> find_markers(std::string_view text);

/// Never throws: captioner failures yield a placeholder marker with captioned=false.
CaptionedMedia caption(const MediaRef& media, Captioner& backend);

}  // namespace chatterbox::caption
