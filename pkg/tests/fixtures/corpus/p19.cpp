#include <bits/stdc++.h>
using namespace std;
int main() {
  int n;
  cin >> n;
  map<string, int> seen;
  for (int i = 0; i < n; i++) {
    string name;
    cin >> name;
    if (seen.count(name)) {
      cout << name << seen[name] << endl;
      seen[name]++;
    } else {
      cout << "OK" << endl;
      seen[name] = 1;
    }
  }
  return 0;
}
