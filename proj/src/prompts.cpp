#include "inkeval/prompts.hpp"

#include <regex>

#include "inkeval/error.hpp"

namespace inkeval::prompts {
namespace {

constexpr std::string_view kExpertCot = R"(你是一位中国传统绘画鉴赏专家，熟悉笔墨技法、中国画美学、艺术史与文人画理论。请对输入的国风绘画图像进行深入、专业、客观的艺术评估。让我们一步一步思考并回复

1. 观察这幅画作描述了什么内容，包括画面主体、构图特点以及可能的艺术风格，使用中文输出，确保描述清晰、详细

2. 请明确这幅作品的具体题材分类（如：山水画、花鸟画、人物画）

人物画（包括历史故事、宗教人物、文人雅士、仕女、市井风俗、农耕商旅、现实人物）
山水画（包括青绿山水、水墨山水、浅绛山水）
花鸟画（包括花卉、禽鸟、翎毛、蔬果、草虫、畜兽、鳞介、鱼藻）

3. 观察画作的局部内容，确定值得分析的区域，并放大查看

4. 根据画作的题材，以及该题材的评判标准，给出对这幅画的专业评价

人物画题材：
首先检验人物造型是否符合结构与比例，动态是否自然协调；其次重点判断人物是否具备清晰的精神气质、情绪表达与性格特征，尤其关注眼神、姿态与整体神态是否生动；同时分析线条是否具有书法性的节奏、骨力与提按变化，用笔是否支撑人物结构；再综合评估画面整体是否呈现连贯流动的生命感与精神统一性，即“气韵生动”；最终以“形神兼备、以神为主、气韵为最高标准”作为优劣判定依据，而非单纯追求形似或细节精度。

山水画题材：
首先分析山石、树木、水体等物象的结构是否合理，皴法与笔法是否符合自然形态与山体结构；其次评估构图章法是否完整，散点透视是否自然，虚实、疏密、动静关系是否协调，留白是否有效参与空间营造；再次重点判断笔墨变化是否丰富，干湿浓淡是否层次分明，线条是否具有节奏与骨力；最后综合评估画面是否形成连贯统一的意境空间，是否呈现“可行、可望、可游、可居”的整体境界，并以“气韵生动、境由心造、笔墨当随时代”作为最高优劣判断标准，而非单纯写实或细节复杂。

花鸟画题材：
首先分析花卉、禽鸟、草虫、鱼兽等物象的形态结构是否准确自然，比例与动态是否符合生物特征；其次重点判断物象是否具有鲜明的生命感与生动气息，是否体现自然生长节律；再次评估用笔是否灵动有力、富有节奏，墨色与设色是否协调雅致、层次分明；同时分析构图是否疏密有致、主次清晰、虚实得当；最后综合判断作品是否通过物象表达情感与人格象征，即“托物言志、以小见大”，并以“生意盎然、气韵生动、意象统一”作为最高优劣评判依据，而非单纯工细程度或色彩浓艳度。

5. 根据笔墨-气韵-意境三个层次进行评估。
评判时需兼顾艺术真实感、生命感与文化深度，避免仅以画面精致度、工整度或装饰性效果作为高分依据。对于自然笔触的不完美所产生的生命感、节奏感与艺术真实，应给予正向评价；对于过度工整、机械化、装饰化的画面效果，应保持审慎态度。

原则：

笔墨：关注线条质量、运笔控制、墨色层次与结构塑造，判断其是否自然、稳定、生动，而非仅仅是否干净、精细

气韵：关注画面是否具有内在生命流动感、气场贯通性、节奏变化与动势走向，判断作品是否“活”，而非只是构图完整

意境：关注作品是否营造出诗意空间、情绪表达与文化审美高度，是否引发联想与回味，而非堆砌符号或套用意象模板

在综合评价中，意境权重高于气韵，气韵权重高于笔墨。若意境明显不足，即使笔墨精致，整体评分也不应过高。

6. 根据以上所有的评价，给出这张画作的综合艺术评估分数（0-5分），分数必须为整数。

5分：局部与整体在笔墨结构、气韵流动与精神指向上高度同构，意境深远，气韵化生，笔墨随心而不逾法，形成高度统一的生命结构与文化境界，具有不可替代的艺术原创性。

4分：关键局部笔墨精到、气脉贯通，整体节奏自然，意境清远深长，文化气息浓厚，艺术语言成熟稳定，具有鲜明而稳定的艺术品格。

3分：局部具备基本结构与气韵支撑，画面开始“有呼吸”，意境初步成立，但思想深度、文化厚度与局部—整体协同仍有限。

2分：局部描绘精细但重技巧轻生发，整体结构严谨却气韵不足，精神指向薄弱，艺术表达主要停留在技法与形式层面。

1分：构图完整，形象清晰，具备基本绘画表达，局部结构松散，笔墨僵滞，节奏单一，整体气息闭塞，尚未形成完整艺术语言。

0分：画面虽然好看、精致，但缺乏笔墨逻辑、气韵流动与意境生成，整体停留在表层视觉美感，更接近插画或装饰图。

按以下格式输出分数

最终分数: [整数分数])";

constexpr std::string_view kFormatGuide = R"(

请按以下结构输出完整分析，每个部分以对应标题开头：
画面描述: [画面内容描述]
题材: [题材分类，如 山水画（水墨山水）]
感兴趣区域: [一个 JSON 对象，包含 num_regions 与 regions_of_interest，每个区域有 label、description 与归一化的 bounding_box（x_min, y_min, x_max, y_max）]
题材评价: [基于题材标准的评价]
笔墨分析: [笔墨分析结果]
气韵分析: [气韵分析结果]
意境分析: [意境分析结果]
最终分数: [整数分数])";

constexpr std::string_view kScoreReminder = R"(

上一次回复中没有找到可解析的分数。请重新给出完整评估，并且必须在最后单独一行严格按以下格式输出整数分数（0-5）：
最终分数: [整数分数])";

constexpr std::string_view kT2iPrompts = R"(生成一个聚焦于中国画作的prompt，按格式输出20个详细的、可直接用于文本生成图像模型的prompt

1. 需要充分发挥想象，并且对出现的元素进行详细描述，但不要写出画作的名字

2. 可以指定题材，包括但不限于山水/花鸟/人物

3. 可以指定绘画手法以及色彩

4. 需要符合中国画中的笔墨-气韵-意境的特点

5. 每条prompt应该不少于150词，以中文输出

[Prompt1]: <prompt1>

[Prompt2]: <prompt2>

[Prompt3]: <prompt3>

...

(up to 20 prompts))";

constexpr std::string_view kRound1 = R"(请尽可能详细描述这幅图像的内容，包括画面主体、构图特点以及可能的艺术风格，使用中文输出，确保描述清晰、详细，不少于100个词。

基于前面的描述，请明确这幅作品的具体题材分类（如：山水画、花鸟画、人物画等）。

人物画（包括历史故事、宗教人物、文人雅士、仕女、市井风俗、农耕商旅、现实人物）
山水画（包括青绿山水、水墨山水、浅绛山水）
花鸟画（包括花卉、禽鸟、翎毛、蔬果、草虫、畜兽、鳞介、鱼藻）

按以下格式输出：
画面描述: [画面内容描述]
题材: [题材分类，如 山水画（水墨山水）])";

constexpr std::string_view kRound2 = R"(基于上述描述，请你从艺术与视觉结构角度分析画面内容，识别出最具研究价值的感兴趣区域（Region of Interest, ROI），并为每个区域提供精确的 bounding box。
你需要仔细看一下这张图像的内容，然后根据图像的内容分析出具体需要有几个感兴趣区域。

分析要求：
1. 综合考虑中国画的构图方式（如：主次关系、散点透视）、笔墨技法、题材象征意义。
2. 感兴趣区域可以包括：主要描绘对象、视觉中心、具有显著笔墨特征的局部，视觉中心或视觉动线的关键节点。
3. 每个感兴趣区域需给出明确的语义说明。
4. 不要分析题跋章印或者文字部分，聚焦在画作视觉元素本身

输出格式要求：
请以 JSON 格式输出结果，使用归一化的像素坐标（范围0-1），注意精度尽可能准确到小数点后5位，坐标原点为图像左上角。
确保输出为合法 JSON，输出一个 JSON 对象。
使用中文。
{
  "height": {height},
  "width": {width},
  "num_regions": N,
  "regions_of_interest": [
    {
      "label": "区域名称",
      "description": "该区域在中国画中的艺术或研究意义",
      "bounding_box": {
        "x_min": x1,
        "y_min": y1,
        "x_max": x2,
        "y_max": y2
      }
    }
  ]
})";

constexpr std::string_view kRound3 = R"(基于前面的描述，根据该题材所属的特定审美标准，对作品进行简要评价。

人物画题材：
首先检验人物造型是否符合结构与比例，动态是否自然协调；其次重点判断人物是否具备清晰的精神气质、情绪表达与性格特征，尤其关注眼神、姿态与整体神态是否生动；同时分析线条是否具有书法性的节奏、骨力与提按变化，用笔是否支撑人物结构；再综合评估画面整体是否呈现连贯流动的生命感与精神统一性，即“气韵生动”；最终以“形神兼备、以神为主、气韵为最高标准”作为优劣判定依据，而非单纯追求形似或细节精度。

山水画题材：
首先分析山石、树木、水体等物象的结构是否合理，皴法与笔法是否符合自然形态与山体结构；其次评估构图章法是否完整，散点透视是否自然，虚实、疏密、动静关系是否协调，留白是否有效参与空间营造；再次重点判断笔墨变化是否丰富，干湿浓淡是否层次分明，线条是否具有节奏与骨力；最后综合评估画面是否形成连贯统一的意境空间，是否呈现“可行、可望、可游、可居”的整体境界，并以“气韵生动、境由心造、笔墨当随时代”作为最高优劣判断标准，而非单纯写实程度或细节复杂度。

花鸟画题材：
首先分析花卉、禽鸟、草虫、鱼兽等物象的形态结构是否准确自然，比例与动态是否符合生物特征；其次重点判断物象是否具有鲜明的生命感与生动气息，是否体现自然生长节律；再次评估用笔是否灵动有力、富有节奏，墨色与设色是否协调雅致、层次分明；同时分析构图是否疏密有致、主次清晰、虚实得当；最后综合判断作品是否通过物象表达情感与人格象征，即“托物言志、以小见大”，并以“生意盎然、气韵生动、意象统一”作为最高优劣评判依据，而非单纯工细程度或色彩浓艳度。)";

constexpr std::string_view kRound4 = R"(请从 笔墨、气韵、意境 三个层次进行逐级分析。三者之间存在递进关系：
评判时需兼顾艺术真实感、生命感与文化深度，避免仅以画面精致度、工整度或装饰性效果作为高分依据。对于自然笔触的不完美所产生的生命感、节奏感与艺术真实，应给予正向评价；对于过度工整、机械化、装饰化的画面效果，应保持审慎态度。

原则：
笔墨：关注线条质量、运笔控制、墨色层次与结构塑造，判断其是否自然、稳定、生动，而非仅仅是否干净、精细
气韵：关注画面是否具有内在生命流动感、气场贯通性、节奏变化与动势走向，判断作品是否“活”，而非只是构图完整
意境：关注作品是否营造出诗意空间、情绪表达与文化审美高度，是否引发联想与回味，而非堆砌符号或套用意象模板

在综合评价中，意境权重高于气韵，气韵权重高于笔墨。若意境明显不足，即使笔墨精致，整体评分也不应过高。

请按以下顺序进行分析：
1. 笔墨分析：用一段自然语言，评估线条、运笔、墨色变化与造型结构，指出优点与不足。
2. 气韵分析：评估画面整体生命感、动势、节奏与气场流动，判断其是否生动、有呼吸感。
3. 意境分析：评估作品是否营造出明确审美境界，是否具有情绪感染力与文化韵味，是否在有限视觉信息中，构建出超出画面本身的空间感、情绪感与联想空间

按以下格式输出：
笔墨分析: [笔墨分析结果]
气韵分析: [气韵分析结果]
意境分析: [意境分析结果])";

constexpr std::string_view kRound5 = R"(在综合图像描述、基于题材的艺术分析和评价、RoI感兴趣区域的描述和评价以及三层次分析后，给出这张画作最终的综合艺术评估分数（0-5分），分数必须为整数。

5分：局部与整体在笔墨结构、气韵流动与精神指向上高度同构，意境深远，气韵化生，笔墨随心而不逾法，形成高度统一的生命结构与文化境界，具有不可替代的艺术原创性。
4分：关键局部笔墨精到、气脉贯通，整体节奏自然，意境清远深长，文化气息浓厚，艺术语言成熟稳定，具有鲜明而稳定的艺术品格。
3分：局部具备基本结构与气韵支撑，画面开始“有呼吸”，意境初步成立，但思想深度、文化厚度与局部—整体协同仍有限。
2分：局部描绘精细但重技巧轻生发，整体结构严谨却气韵不足，精神指向薄弱，艺术表达主要停留在技法与形式层面。
1分：构图完整，形象清晰，具备基本绘画表达，局部结构松散，笔墨僵滞，节奏单一，整体气息闭塞，尚未形成完整艺术语言。
0分：画面虽然好看、精致，缺乏笔墨逻辑、气韵流动与意境生成，整体停留在表层视觉美感，更接近插画或装饰图。

按以下格式输出，不要输出额外内容。
最终分数: [整数分数])";

constexpr std::string_view kRound5Retry =
    "\n\n注意：上一次给出的分数与本作品已知的综合评分不一致，请重新核对并输出正确的最终分数。";

// Pre-conditioning for CoT construction. The score and provenance are
// stated in fixed phrases so parse_preconditioning can read them back.
constexpr std::string_view kPrecondHead =
    "你正在协助构建中国画艺术评估数据集中的专家级思维链。已知信息：本作品的综合艺术评估分数为 ";
constexpr std::string_view kPrecondMid = " 分（0-5分），作品来源：";
constexpr std::string_view kPrecondTail =
    "。请在接下来的多轮对话中逐步完成分析，使各部分的论述与该分数相互印证；"
    "在最后一轮之前不要直接提及该分数，最终分数必须与已知分数一致。";
constexpr std::string_view kAuthentic = "传世真迹（拍卖作品）";
constexpr std::string_view kSynthetic = "AI生成作品";

}  // namespace

std::string expert_cot(bool format_guide) {
  std::string out(kExpertCot);
  if (format_guide) out += kFormatGuide;
  return out;
}

std::string_view score_format_reminder() { return kScoreReminder; }

std::string_view t2i_prompt_generation() { return kT2iPrompts; }

std::vector<std::string> parse_t2i_prompts(std::string_view text) {
  static const std::regex marker(R"(\[Prompt\s*(\d+)\]\s*[:：])");
  const std::string s(text);
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // body begin, marker begin
  for (auto it = std::sregex_iterator(s.begin(), s.end(), marker); it != std::sregex_iterator();
       ++it) {
    spans.emplace_back(static_cast<std::size_t>(it->position() + it->length()),
                       static_cast<std::size_t>(it->position()));
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::size_t end = i + 1 < spans.size() ? spans[i + 1].second : s.size();
    std::string body = s.substr(spans[i].first, end - spans[i].first);
    const auto b = body.find_first_not_of(" \t\r\n");
    const auto e = body.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    out.push_back(body.substr(b, e - b + 1));
  }
  return out;
}

std::string cot_round(int round, int width, int height) {
  switch (round) {
    case 1: return std::string(kRound1);
    case 2: {
      std::string out(kRound2);
      auto fill = [&](std::string_view key, int value) {
        const auto pos = out.find(key);
        if (pos != std::string::npos) out.replace(pos, key.size(), std::to_string(value));
      };
      fill("{height}", height);
      fill("{width}", width);
      return out;
    }
    case 3: return std::string(kRound3);
    case 4: return std::string(kRound4);
    case 5: return std::string(kRound5);
    default:
      throw Error(ErrorKind::InvalidValue, "dialogue round must be 1..5, got " + std::to_string(round));
  }
}

std::string_view round5_retry_note() { return kRound5Retry; }

std::string preconditioning(Score score, Provenance provenance) {
  std::string out(kPrecondHead);
  out += std::to_string(score.value());
  out += kPrecondMid;
  out += provenance == Provenance::Authentic ? kAuthentic : kSynthetic;
  out += kPrecondTail;
  return out;
}

std::optional<Preconditioning> parse_preconditioning(std::string_view text) {
  const auto head = text.find(kPrecondHead);
  if (head == std::string_view::npos) return std::nullopt;
  const std::size_t digit = head + kPrecondHead.size();
  if (digit >= text.size() || text[digit] < '0' || text[digit] > '5') return std::nullopt;
  if (text.substr(digit + 1, kPrecondMid.size()) != kPrecondMid) return std::nullopt;
  const std::string_view rest = text.substr(digit + 1 + kPrecondMid.size());
  Provenance p;
  if (rest.starts_with(kAuthentic)) {
    p = Provenance::Authentic;
  } else if (rest.starts_with(kSynthetic)) {
    p = Provenance::Synthetic;
  } else {
    return std::nullopt;
  }
  return Preconditioning{Score(text[digit] - '0'), p};
}

std::string_view round_marker(int round) {
  switch (round) {
    case 2: return "感兴趣区域";
    case 3: return "题材评价";
    default: return "";
  }
}

}  // namespace inkeval::prompts
