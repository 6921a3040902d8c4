#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chatcheck/common.hpp"

namespace chatcheck::meta {

namespace detail {

// Bundled word list: common English plus customer-support, banking and
// health-chatbot vocabulary. One word per whitespace-separated token,
// lowercase. Deliberately small; pair it with Dictionary::add_text_vocabulary
// over the training data to whitelist domain terms.
inline const char* kBundledWords = R"(
a abandon able about above accept access account accounts across action actions activate active
activity add added address adult adults advice afford after afternoon again against age agent
agents ago agree ahead alert alerts all allow allowed almost alone already also always am amount
an and announce annual another answer answers any anybody anymore anyone anything app apply
appointment are area around arrange arrived as ask asked asks assist assistance at atm attach
attempt authorize auto available average avoid away baby back bad balance bank banking bar be
became because become been before began begin behind being believe below benefit best better
between big bill billing bit block blocked booster both bought box branch brand break broke broken
brought budget business but button buy buying by calendar call calls came can cancel cancelled
cancellation cant capital card cards care careful carry case cases cash category cause center
certain change changed changes charge charged charges chat chatbot check checked checking child
children choose chose city claim clarify class clean clear click client close closed code cold
come comes coming company complete completed complex computer concern condition confirm
confirmation connect connected connection contact contain contained contract control copy correct
cost costs could count country course cover coverage covid create credit currency current customer
cut daily data date day days deal debit decide decline declined deduct delay delete delivery
deny deposit describe detail details device did different difficult digital direct disable
disabled discount dispute distance do doctor document documents does dog dollar dollars done dont
door double down download drink drive driver drop due during each early earn easy eat effect
effective either elderly else email emergency employee empty enable enabled end enough enter
entered error errors even evening event ever every everyone everything exact exactly example
exchange expect expensive expire expired expiry explain extra face fact fail failed fails fair
fall family far fast fee feel fees fever few figure file fill final finally find fine finish
first fix fixed flight flow follow food for foreign forgot form found free freeze frequent friday
friend from full fund funds further general get gets getting give given go goes going gone good
got great group grow guide had half hand handle happen happened happens hard has have having he
health hear held hello help helped helpful helping her here hi high him his history hold holder
home hospital hotel hour hours house household how however human hung i idea identify identity
if ill immediately important in inactive include income incorrect increase indeed info
information inside instead insurance interact interest international internet into invalid
invoice is isolate issue issued issues it item items its itself job join just keep kept key kid
kids kind knew know known large last late later latest least leave left less let letter level
like limit limited line link list little live loan local location lock locked log login logged
long longer look looked looking lost lot low lower machine made mail main make makes making
manage manager many mark mask masks match matter may maybe me mean means measure medical meet
member membership menu merchant message messages method middle might min mine minute minutes
miss missed missing mistake mobile moment monday money month monthly months more morning most
move much must my myself name near need needed needs never new news next night no nobody none
normal not note nothing notice notification notify now number numbers of off offer office often
ok okay old on once one online only open opened opening option options or order ordered other
our out outside over overdraft own owner page paid pandemic panel paper parent part party pass
password past pause pay payee payment payments pending people per percent period person personal
phone physical pick picture pin place plan planned plans play please point points police policy
portal positive possible post pound pounds prefer prevent previous price print priority privacy
probably problem problems process processed product products profile program promo promotion
protect protection prove provide provider public purchase purpose put quarantine query question
questions queue quick quite rate rates rather reach read ready real really reason receipt receive
received recent recently recommend record recover reduce refer reference refund refunded refuse
register regular reject rejected relative release remain remember remind reminder remove renew
rent repeat replace replacement report request require reset resident resolve response rest
restart restaurant restrict restriction result results resume retired return returned review
reward right risk room rule rules run running safe safety said sale same save saving savings saw
say schedule school screen search second section secure security see seem seen select self sell
send sense sent service services session set setting settings setup several shall share she shift
shop shopping short should show shown shut sick side sign signal simple since single site
situation size sleep slow small so social solve some somebody someone something soon sorry sort
source speak special specific spend spent split spoke spouse staff stage standard start started
state statement statements status stay step steps still stolen stop stopped store story street
strong stuck student study submit subscription sum summer support sure swap symptom symptoms
system take taken takes talk tap tax team tell temperature term terminal terms test tested
testing tests text than thank thanks that the their them then there these they thing things think
third this those though thought through thursday ticket time times tired to today together told
tomorrow too took top topic total touch track transaction transactions transfer transferred
transfers travel treat tried trip true trust try trying tuesday turn turned two type under
understand unknown unlock until up update updated updating upgrade upload upon urgent us usage
use used useful user using usual usually vacation vaccinated vaccination vaccinations vaccine
vaccines valid value variant verification verify version very via view virtual virus visit wait
waiting walk wallet want wanted was watch water way we wear web website week weekend weekly weeks
well went were what when where which while who whole whom whose why will window wire wish with
withdraw withdrawal within without work worked working works world worry worth would write
written wrong year years yes yesterday yet you young your yours zero
)";

// Contraction pairs: expansion phrase -> surface form. The surface forms make
// up the detection lexicon; the pairs drive the perturbation transforms in
// both directions.
inline const std::vector<std::pair<std::string, std::string>>& contraction_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"i am", "i'm"},           {"i have", "i've"},        {"i will", "i'll"},
      {"i would", "i'd"},        {"you are", "you're"},     {"you have", "you've"},
      {"you will", "you'll"},    {"you would", "you'd"},    {"he is", "he's"},
      {"he will", "he'll"},      {"he would", "he'd"},      {"she is", "she's"},
      {"she will", "she'll"},    {"she would", "she'd"},    {"it is", "it's"},
      {"it will", "it'll"},      {"we are", "we're"},       {"we have", "we've"},
      {"we will", "we'll"},      {"we would", "we'd"},      {"they are", "they're"},
      {"they have", "they've"},  {"they will", "they'll"},  {"they would", "they'd"},
      {"that is", "that's"},     {"that will", "that'll"},  {"that would", "that'd"},
      {"there is", "there's"},   {"there will", "there'll"},{"there would", "there'd"},
      {"here is", "here's"},     {"who is", "who's"},       {"who will", "who'll"},
      {"what is", "what's"},     {"what will", "what'll"},  {"where is", "where's"},
      {"when is", "when's"},     {"why is", "why's"},       {"how is", "how's"},
      {"is not", "isn't"},       {"are not", "aren't"},     {"was not", "wasn't"},
      {"were not", "weren't"},   {"have not", "haven't"},   {"has not", "hasn't"},
      {"had not", "hadn't"},     {"will not", "won't"},     {"would not", "wouldn't"},
      {"do not", "don't"},       {"does not", "doesn't"},   {"did not", "didn't"},
      {"cannot", "can't"},       {"could not", "couldn't"}, {"should not", "shouldn't"},
      {"might not", "mightn't"}, {"must not", "mustn't"},   {"need not", "needn't"},
      {"let us", "let's"},       {"could have", "could've"},{"would have", "would've"},
      {"should have", "should've"}, {"might have", "might've"}, {"must have", "must've"},
      {"is not", "ain't"},       {"you all", "y'all"},      {"it would", "it'd"},
      {"who would", "who'd"},    {"what are", "what're"},
  };
  return pairs;
}

}  // namespace detail

// Word list for spelling checks. Lookup is over lowercased alphabetic parts.
class Dictionary {
 public:
  static Dictionary bundled() {
    Dictionary d;
    for (const auto& w : split_ws(detail::kBundledWords)) d.words_.insert(w);
    return d;
  }

  // One lowercase word per line; '#' starts a comment.
  static Dictionary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dictionary file '" + path + "'");
    Dictionary d;
    std::string line;
    while (std::getline(in, line)) {
      auto t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      d.words_.insert(lower_ascii(t));
    }
    if (d.words_.empty()) throw DataError("dictionary file '" + path + "' has no words");
    return d;
  }

  void add(std::string_view word) { words_.insert(lower_ascii(word)); }

  // Whitelist every alphabetic part that occurs in the given text. Used to
  // fold a dataset's own vocabulary (product names, domain terms) into the
  // dictionary.
  void add_text_vocabulary(std::string_view text) {
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) {
        words_.insert(cur);
        cur.clear();
      }
    };
    for (char c : text) {
      if (is_ascii_alpha(c)) cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      else flush();
    }
    flush();
  }

  bool contains(std::string_view lowercase_word) const {
    return words_.count(std::string(lowercase_word)) > 0;
  }

  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

class ContractionLexicon {
 public:
  static ContractionLexicon bundled() {
    ContractionLexicon lex;
    for (const auto& [expansion, surface] : detail::contraction_pairs()) {
      lex.surfaces_.insert(surface);
      lex.expansion_.emplace(surface, expansion);  // first pair for a surface wins
      lex.apply_.emplace_back(expansion, surface);
    }
    return lex;
  }

  // Override file: one entry per line, either "surface" or
  // "surface=expansion". Detection uses the surfaces; transforms use the
  // pairs when given.
  static ContractionLexicon load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open contraction lexicon '" + path + "'");
    ContractionLexicon lex;
    std::string line;
    while (std::getline(in, line)) {
      auto t = std::string(trim(line));
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        lex.surfaces_.insert(lower_ascii(t));
      } else {
        const std::string surface = lower_ascii(trim(std::string_view(t).substr(0, eq)));
        const std::string expansion = lower_ascii(trim(std::string_view(t).substr(eq + 1)));
        lex.surfaces_.insert(surface);
        lex.expansion_.emplace(surface, expansion);
        lex.apply_.emplace_back(expansion, surface);
      }
    }
    if (lex.surfaces_.empty()) throw DataError("contraction lexicon '" + path + "' is empty");
    return lex;
  }

  bool is_contraction(std::string_view lowercase_token) const {
    return surfaces_.count(std::string(lowercase_token)) > 0;
  }

  std::optional<std::string> expansion_of(std::string_view surface) const {
    auto it = expansion_.find(lower_ascii(surface));
    if (it == expansion_.end()) return std::nullopt;
    return it->second;
  }

  // (expansion phrase, surface) pairs in lexicon order.
  const std::vector<std::pair<std::string, std::string>>& application_pairs() const {
    return apply_;
  }

 private:
  std::unordered_set<std::string> surfaces_;
  std::unordered_map<std::string, std::string> expansion_;
  std::vector<std::pair<std::string, std::string>> apply_;
};

}  // namespace chatcheck::meta
