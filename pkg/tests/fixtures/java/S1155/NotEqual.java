import java.util.List;

public class NotEqual {
    public boolean some(List<String> list) {
        boolean a = list.size() != 0; // expect: S1155
        boolean b = list.size() > 0; // expect: S1155
        return a && b;
    }
}
